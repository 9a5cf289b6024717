use serde::{Deserialize, Serialize};

use super::harness::{run_evolution_observed, EvolutionConfig, RunOutcome};
use super::problems::Problem;
use crate::error::{Error, Result};
use crate::metrics::{js_divergence, probability_ratio, FidelityReport};
use crate::oracle::{check_exact_size, exact_lexicase_probs, exact_method_distribution, sample_individual_distribution};
use crate::population::RandomSource;
use crate::selectors::{SelectorConfig, SelectorRegistry};

/// How reference (and, where possible, candidate) distributions are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMode {
    /// Exact oracle; instances beyond its size guard are an error.
    Exact,
    /// Sampled distributions only.
    Empirical,
    /// Exact where the guard allows, sampled otherwise.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityOutcome {
    pub run: RunOutcome,
    pub reports: Vec<FidelityReport>,
}

/// Evolves with lexicase selection and, at every generation, compares the
/// candidate method's selection distribution with lexicase's.
///
/// Probability ratios follow the run's tracked lineage (the first solution,
/// or the final best individual when the run does not succeed). Empirical
/// distributions for both methods use the same random source, so a
/// candidate identical to the reference reproduces it exactly.
pub fn fidelity_trace(
    problem: &dyn Problem,
    candidate: &SelectorConfig,
    registry: &SelectorRegistry,
    cfg: &EvolutionConfig,
    samples: usize,
    mode: FidelityMode,
    rng: &RandomSource,
) -> Result<FidelityOutcome> {
    if samples == 0 {
        return Err(Error::config("fidelity.samples", "must be >= 1"));
    }
    let reference_cfg = SelectorConfig {
        parallel: candidate.parallel,
        ..SelectorConfig::new("lexicase")
    };
    let reference = registry.build(&reference_cfg)?;
    let candidate_selector = registry.build(candidate)?;

    let mut per_generation: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let run = run_evolution_observed(problem, reference.as_ref(), cfg, rng, |view| {
        let sample_rng = view.rng.derive("sample");
        let exact = match mode {
            FidelityMode::Empirical => false,
            FidelityMode::Exact => {
                check_exact_size(view.classing)?;
                true
            }
            FidelityMode::Auto => check_exact_size(view.classing).is_ok(),
        };
        let p = if exact {
            exact_lexicase_probs(view.classing)?.to_individuals(view.classing)?
        } else {
            sample_individual_distribution(reference.as_ref(), view.classing, samples, &sample_rng)?
        };
        let exact_q = if exact { exact_method_distribution(candidate, view.classing)? } else { None };
        let q = match exact_q {
            Some(q) => q.to_individuals(view.classing)?,
            None => sample_individual_distribution(candidate_selector.as_ref(), view.classing, samples, &sample_rng)?,
        };
        per_generation.push((p.probs, q.probs));
        Ok(())
    })?;

    let reports = run
        .records
        .iter()
        .zip(&per_generation)
        .map(|(record, (p, q))| {
            Ok(FidelityReport {
                generation: record.generation,
                js_divergence: js_divergence(p, q)?,
                probability_ratio: record.ancestor.and_then(|a| probability_ratio(q[a], p[a]).ok()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FidelityOutcome { run, reports })
}
