//! Fidelity metrics between selection distributions.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::SelectionDistribution;
use crate::population::RandomSource;
use crate::stats::quantile_sorted;

const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// One generation's comparison of a candidate method against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub generation: usize,
    /// Jensen-Shannon divergence in nats, in `[0, ln 2]`.
    pub js_divergence: f64,
    /// Candidate / reference probability of the tracked lineage's ancestor;
    /// `None` when the reference probability is zero or no lineage is tracked.
    pub probability_ratio: Option<f64>,
}

/// Jensen-Shannon divergence (natural log) between two probability vectors.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!("distributions have lengths {} and {}", p.len(), q.len())));
    }
    for (name, v) in [("p", p), ("q", q)] {
        let total: f64 = v.iter().sum();
        if v.iter().any(|&x| !(x >= 0.0)) || (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Distribution(format!("{name} is not a probability vector (sum {total})")));
        }
    }
    let half_kl = |a: f64, b: f64| if a > 0.0 { a * (2.0 * a / (a + b)).ln() } else { 0.0 };
    let d = 0.5 * p.iter().zip(q).map(|(&a, &b)| half_kl(a, b) + half_kl(b, a)).sum::<f64>();
    Ok(d.clamp(0.0, LN_2))
}

pub fn js_divergence_between(p: &SelectionDistribution, q: &SelectionDistribution) -> Result<f64> {
    js_divergence(&p.probs, &q.probs)
}

/// `candidate / reference`. A zero reference probability means the lineage
/// could not have been selected by the reference method, and is an error.
pub fn probability_ratio(candidate: f64, reference: f64) -> Result<f64> {
    if reference <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(candidate / reference)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            resamples: 10_000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

/// Mean with a percentile-bootstrap confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelitySummary {
    pub js_divergence: MetricSummary,
    /// Over the reports whose ratio is defined; `None` if there are none.
    pub probability_ratio: Option<MetricSummary>,
}

pub fn bootstrap_mean(values: &[f64], cfg: &BootstrapConfig) -> Result<MetricSummary> {
    if values.is_empty() {
        return Err(Error::Empty("bootstrap sample"));
    }
    if cfg.resamples == 0 || !(cfg.confidence > 0.0 && cfg.confidence < 1.0) {
        return Err(Error::config("bootstrap", "need resamples >= 1 and confidence in (0, 1)"));
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let src = RandomSource::new(cfg.seed).derive("bootstrap");
    let mut means: Vec<f64> = (0..cfg.resamples)
        .map(|b| {
            let mut rng = src.stream(b as u64);
            (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - cfg.confidence) / 2.0;
    Ok(MetricSummary {
        mean,
        ci_low: quantile_sorted(&means, tail),
        ci_high: quantile_sorted(&means, 1.0 - tail),
        n,
    })
}

/// Mean and bootstrap interval of each metric over a series of reports.
pub fn aggregate_fidelity(reports: &[FidelityReport], cfg: &BootstrapConfig) -> Result<FidelitySummary> {
    if reports.is_empty() {
        return Err(Error::Empty("fidelity reports"));
    }
    let js: Vec<f64> = reports.iter().map(|r| r.js_divergence).collect();
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.probability_ratio).collect();
    Ok(FidelitySummary {
        js_divergence: bootstrap_mean(&js, cfg)?,
        probability_ratio: if ratios.is_empty() {
            None
        } else {
            Some(bootstrap_mean(&ratios, cfg)?)
        },
    })
}

/// Averages each run over its generations first, then summarizes the run
/// means.
pub fn aggregate_runs(runs: &[Vec<FidelityReport>], cfg: &BootstrapConfig) -> Result<FidelitySummary> {
    let per_run: Vec<FidelityReport> = runs
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            let n = r.len() as f64;
            let ratios: Vec<f64> = r.iter().filter_map(|x| x.probability_ratio).collect();
            FidelityReport {
                generation: r.len(),
                js_divergence: r.iter().map(|x| x.js_divergence).sum::<f64>() / n,
                probability_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
            }
        })
        .collect();
    aggregate_fidelity(&per_run, cfg)
}
