use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dalex::metrics::{js_divergence_between, probability_ratio};
use dalex::oracle::{check_exact_size, exact_method_distribution, sample_individual_distribution, SelectionDistribution};
use dalex::{RandomSource, SelectorConfig, SelectorRegistry};
use serde::Serialize;

use crate::error::{in_section, CliError, CliResult};
use crate::select::load_classes;

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub errors: PathBuf,
    #[arg(long)]
    pub support: Option<PathBuf>,
    /// Candidate method as `name[:key=value,...]`; repeatable.
    #[arg(long = "method", default_value = "dalex:pressure=200")]
    pub methods: Vec<String>,
    /// Reference method.
    #[arg(long, default_value = "lexicase")]
    pub reference: String,
    /// Samples per empirical distribution.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample every distribution, including ones with an exact oracle.
    #[arg(long)]
    pub empirical: bool,
    /// Sample the reference when the instance exceeds the exact oracle's limits.
    #[arg(long)]
    pub allow_fallback: bool,
    /// Individuals whose candidate/reference probability ratio is reported.
    #[arg(long, value_delimiter = ',')]
    pub lineage: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct Report {
    population: usize,
    classes: usize,
    cases: usize,
    reference: MethodReport,
    candidates: Vec<MethodReport>,
}

#[derive(Debug, Serialize)]
struct MethodReport {
    method: String,
    #[serde(flatten)]
    distribution: SelectionDistribution,
    #[serde(skip_serializing_if = "Option::is_none")]
    js_divergence: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    probability_ratios: Vec<LineageRatio>,
}

#[derive(Debug, Serialize)]
struct LineageRatio {
    individual: usize,
    /// `null` when the reference never selects the individual.
    ratio: Option<f64>,
}

pub fn run(args: &CompareArgs, out: &mut dyn Write) -> CliResult<()> {
    let registry = SelectorRegistry::with_builtins();
    let reference_cfg = SelectorConfig::from_spec(&args.reference).map_err(in_section("reference"))?;
    let candidate_cfgs = args
        .methods
        .iter()
        .map(|m| SelectorConfig::from_spec(m).map_err(in_section("method")))
        .collect::<CliResult<Vec<_>>>()?;
    if args.samples == 0 {
        return Err(CliError::config("samples", "must be >= 1"));
    }

    let classing = load_classes(&args.errors, args.support.as_deref())?;
    let n = classing.population_size();
    if let Some(&bad) = args.lineage.iter().find(|&&i| i >= n) {
        return Err(CliError::config("lineage", format!("individual {bad} out of range for population of {n}")));
    }

    let exact = if args.empirical {
        false
    } else {
        match check_exact_size(&classing) {
            Ok(()) => true,
            Err(_) if args.allow_fallback => false,
            Err(e) => return Err(e.into()),
        }
    };
    let sample_rng = RandomSource::new(args.seed).derive("sample");
    let distribution = |cfg: &SelectorConfig, key: &str| -> CliResult<SelectionDistribution> {
        if exact {
            if let Some(d) = exact_method_distribution(cfg, &classing)? {
                return Ok(d.to_individuals(&classing)?);
            }
        }
        let selector = registry.build(cfg).map_err(in_section(key))?;
        Ok(sample_individual_distribution(selector.as_ref(), &classing, args.samples, &sample_rng)?)
    };

    let p = distribution(&reference_cfg, "reference")?;
    let mut candidates = Vec::with_capacity(candidate_cfgs.len());
    for cfg in &candidate_cfgs {
        let q = distribution(cfg, "method")?;
        let ratios = lineage_ratios(&args.lineage, &q, &p);
        candidates.push(MethodReport {
            method: cfg.label(),
            js_divergence: Some(js_divergence_between(&p, &q)?),
            distribution: q,
            probability_ratios: ratios,
        });
    }
    let report = Report {
        population: n,
        classes: classing.k(),
        cases: classing.n_cases(),
        reference: MethodReport {
            method: reference_cfg.label(),
            distribution: p,
            js_divergence: None,
            probability_ratios: Vec::new(),
        },
        candidates,
    };
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out).map_err(CliError::io("writing output"))
}

fn lineage_ratios(ids: &[usize], q: &SelectionDistribution, p: &SelectionDistribution) -> Vec<LineageRatio> {
    ids.iter()
        .map(|&i| LineageRatio {
            individual: i,
            ratio: probability_ratio(q.probs[i], p.probs[i]).ok(),
        })
        .collect()
}
