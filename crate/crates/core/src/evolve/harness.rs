use std::time::Instant;

use ndarray::Array2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{downsample_cases, umad_mutate};
use super::problems::{Case, Problem};
use crate::error::{Error, Result};
use crate::population::{build_classes, EquivalenceClassing, ErrorMatrix, RandomSource, SupportMatrix};
use crate::selectors::Selector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub pop_size: usize,
    pub generations: usize,
    /// Fraction of training cases used each generation; 1 disables
    /// downsampling.
    pub downsample_rate: f64,
    pub mutation_rate: f64,
    /// Stop after the first generation containing a solution.
    pub stop_on_success: bool,
    /// Record wall-clock selection time. Off by default so that record
    /// streams are reproducible byte for byte.
    pub record_timing: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            pop_size: 200,
            generations: 100,
            downsample_rate: 1.0,
            mutation_rate: 0.09,
            stop_on_success: true,
            record_timing: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 2 {
            return Err(Error::config("run.pop_size", "must be >= 2"));
        }
        if self.generations == 0 {
            return Err(Error::config("run.generations", "must be >= 1"));
        }
        if !(self.downsample_rate > 0.0 && self.downsample_rate <= 1.0) {
            return Err(Error::config("run.downsample_rate", "must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.mutation_rate) {
            return Err(Error::config("run.mutation_rate", "must be in [0, 1)"));
        }
        Ok(())
    }
}

/// One generation of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Lowest and average per-individual mean error on this generation's cases.
    pub best_error: f64,
    pub mean_error: f64,
    /// Number of equivalence classes among the individuals.
    pub classes: usize,
    /// Training cases used, when downsampling.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cases: Option<Vec<usize>>,
    /// Parent (index in this generation) of each individual of the next.
    pub parents: Vec<usize>,
    /// Index of the tracked lineage's member in this generation.
    pub ancestor: Option<usize>,
    /// An individual in this generation solves the problem.
    pub solved: bool,
    /// Classes-to-parents wall time for the batched selection event.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub selection_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub records: Vec<GenerationRecord>,
    pub success: bool,
    pub success_generation: Option<usize>,
    /// (generation, index) of the individual whose lineage is tracked: the
    /// first solution, or the best individual of the last generation.
    pub tracked: (usize, usize),
}

impl RunOutcome {
    pub fn mean_selection_seconds(&self) -> Option<f64> {
        let times: Vec<f64> = self.records.iter().filter_map(|r| r.selection_seconds).collect();
        (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64)
    }
}

/// What an observer sees of each generation, just before selection.
#[derive(Debug)]
pub struct GenerationView<'a> {
    pub generation: usize,
    pub classing: &'a EquivalenceClassing,
    pub rng: RandomSource,
}

pub fn run_evolution(
    problem: &dyn Problem,
    selector: &dyn Selector,
    cfg: &EvolutionConfig,
    rng: &RandomSource,
) -> Result<RunOutcome> {
    run_evolution_observed(problem, selector, cfg, rng, |_| Ok(()))
}

/// [`run_evolution`] with a callback invoked on every generation's classes.
pub fn run_evolution_observed<F>(
    problem: &dyn Problem,
    selector: &dyn Selector,
    cfg: &EvolutionConfig,
    rng: &RandomSource,
    mut observe: F,
) -> Result<RunOutcome>
where
    F: FnMut(GenerationView<'_>) -> Result<()>,
{
    cfg.validate()?;
    if problem.n_train() == 0 {
        return Err(Error::config("problem.cases", "problem has no training cases"));
    }
    let n = cfg.pop_size;
    let init = rng.derive("init");
    let mut population: Vec<Vec<u32>> = (0..n)
        .map(|i| {
            let mut s = init.stream(i as u64);
            (0..problem.initial_length())
                .map(|_| s.random_range(0..problem.n_tokens()))
                .collect()
        })
        .collect();

    let mut records = Vec::with_capacity(cfg.generations);
    let mut success_generation = None;
    let mut solution_index = None;
    let mut last_means = Vec::new();

    for generation in 0..cfg.generations {
        let gen_rng = rng.derive_index(generation as u64);
        let cases: Vec<usize> = if cfg.downsample_rate < 1.0 {
            downsample_cases(problem.n_train(), cfg.downsample_rate, &mut gen_rng.derive("downsample").stream(0))?
        } else {
            (0..problem.n_train()).collect()
        };

        let (errors, support) = evaluate_population(problem, &population, &cases)?;
        let means = row_means(&errors, &support);
        let solved: Vec<bool> = population.par_iter().map(|g| problem.is_solution(g)).collect();
        let first_solution = solved.iter().position(|&s| s);

        let start = Instant::now();
        let classing = build_classes(&errors, &support)?;
        let select_rng = gen_rng.derive("select");
        let parents = selector.select_individuals(&classing, n, &select_rng)?;
        let elapsed = start.elapsed().as_secs_f64();

        observe(GenerationView {
            generation,
            classing: &classing,
            rng: gen_rng.derive("observe"),
        })?;

        records.push(GenerationRecord {
            generation,
            best_error: means.iter().copied().fold(f64::INFINITY, f64::min),
            mean_error: means.iter().sum::<f64>() / n as f64,
            classes: classing.k(),
            cases: (cfg.downsample_rate < 1.0).then(|| cases.clone()),
            parents: parents.clone(),
            ancestor: None,
            solved: first_solution.is_some(),
            selection_seconds: cfg.record_timing.then_some(elapsed.max(f64::MIN_POSITIVE)),
        });

        if let Some(s) = first_solution {
            success_generation = Some(generation);
            solution_index = Some(s);
            if cfg.stop_on_success {
                break;
            }
        }
        last_means = means;

        if generation + 1 < cfg.generations {
            let mutate = gen_rng.derive("mutate");
            population = parents
                .par_iter()
                .enumerate()
                .map(|(i, &p)| {
                    umad_mutate(&population[p], cfg.mutation_rate, problem.n_tokens(), &mut mutate.stream(i as u64))
                })
                .collect();
        }
    }

    let tracked = match (success_generation, solution_index) {
        (Some(g), Some(i)) => (g, i),
        _ => {
            let best = last_means
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .map_or(0, |(i, _)| i);
            (records.len() - 1, best)
        }
    };
    trace_lineage(&mut records, tracked);

    Ok(RunOutcome {
        success: success_generation.is_some(),
        success_generation,
        tracked,
        records,
    })
}

/// Fills `ancestor` backwards from `(generation, index)`.
fn trace_lineage(records: &mut [GenerationRecord], (generation, index): (usize, usize)) {
    let mut current = index;
    for g in (0..=generation).rev() {
        records[g].ancestor = Some(current);
        if g > 0 {
            current = records[g - 1].parents[current];
        }
    }
}

/// Errors and support on `cases`. Undefined entries carry error 0; an
/// individual defined on none of the cases gets the worst error everywhere
/// with full support.
fn evaluate_population(
    problem: &dyn Problem,
    population: &[Vec<u32>],
    cases: &[usize],
) -> Result<(ErrorMatrix, SupportMatrix)> {
    let worst = problem.worst_error();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = population
        .par_iter()
        .map(|genome| {
            let mut errs = Vec::with_capacity(cases.len());
            let mut defined = Vec::with_capacity(cases.len());
            for &j in cases {
                match problem.evaluate(genome, Case::Train(j)) {
                    Some(e) => {
                        errs.push(e);
                        defined.push(1.0);
                    }
                    None => {
                        errs.push(0.0);
                        defined.push(0.0);
                    }
                }
            }
            if defined.iter().all(|&d| d == 0.0) {
                errs.fill(worst);
                defined.fill(1.0);
            }
            (errs, defined)
        })
        .collect();
    let (n, m) = (population.len(), cases.len());
    let mut e = Array2::zeros((n, m));
    let mut s = Array2::zeros((n, m));
    for (i, (errs, defined)) in rows.into_iter().enumerate() {
        e.row_mut(i).assign(&ndarray::ArrayView1::from(&errs));
        s.row_mut(i).assign(&ndarray::ArrayView1::from(&defined));
    }
    let errors = ErrorMatrix::new(e)?;
    let support = if s.iter().all(|&v| v == 1.0) {
        SupportMatrix::full(n, m)
    } else {
        SupportMatrix::new(s)?
    };
    Ok((errors, support))
}

fn row_means(errors: &ErrorMatrix, support: &SupportMatrix) -> Vec<f64> {
    (0..errors.n_rows())
        .map(|i| {
            let (mut sum, mut count) = (0.0, 0.0);
            for j in 0..errors.n_cols() {
                if support.is_defined(i, j) {
                    sum += errors.get(i, j);
                    count += 1.0;
                }
            }
            sum / count
        })
        .collect()
}
