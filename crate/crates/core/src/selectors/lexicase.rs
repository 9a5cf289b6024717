//! Iterative lexicase selection and its epsilon relaxation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Selector;
use crate::error::{Error, Result};
use crate::population::{EquivalenceClassing, RandomSource};
use crate::stats::weighted_mad;

/// Plain lexicase: keep only candidates elite on each case in turn.
#[derive(Debug, Clone, Default)]
pub struct Lexicase {
    pub parallel: bool,
}

/// Semi-dynamic epsilon-lexicase: per-case slack fixed from the whole
/// population, minimum taken over the remaining candidates.
#[derive(Debug, Clone, Default)]
pub struct EpsilonLexicase {
    pub parallel: bool,
}

impl Selector for Lexicase {
    fn name(&self) -> &str {
        "lexicase"
    }

    fn select_classes(&self, classing: &EquivalenceClassing, n_events: usize, rng: &RandomSource) -> Result<Vec<usize>> {
        Ok(run_events(n_events, self.parallel, rng, |stream| {
            lexicase_event(classing, None, stream)
        }))
    }
}

impl Selector for EpsilonLexicase {
    fn name(&self) -> &str {
        "epsilon_lexicase"
    }

    fn select_classes(&self, classing: &EquivalenceClassing, n_events: usize, rng: &RandomSource) -> Result<Vec<usize>> {
        let eps = epsilon_for_cases(classing);
        Ok(run_events(n_events, self.parallel, rng, |stream| {
            lexicase_event(classing, Some(&eps), stream)
        }))
    }
}

/// Runs `n_events` independent events; event `i` gets stream `i`.
pub(crate) fn run_events<F>(n_events: usize, parallel: bool, rng: &RandomSource, event: F) -> Vec<usize>
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync,
{
    let one = |i: usize| event(&mut rng.stream(i as u64));
    if parallel {
        (0..n_events).into_par_iter().map(one).collect()
    } else {
        (0..n_events).map(one).collect()
    }
}

/// Median absolute deviation from the median on each case, over the whole
/// (ungrouped) population. Only defined entries take part; a case nobody is
/// defined on gets zero.
pub fn epsilon_for_cases(classing: &EquivalenceClassing) -> Vec<f64> {
    let errors = classing.errors();
    let support = classing.support();
    let members = classing.members();
    (0..classing.n_cases())
        .map(|j| {
            let mut items: Vec<(f64, usize)> = (0..classing.k())
                .filter(|&c| support.is_defined(c, j))
                .map(|c| (errors.get(c, j), members[c].len()))
                .collect();
            weighted_mad(&mut items).unwrap_or(0.0)
        })
        .collect()
}

/// Keeps the candidates within `eps` of the best defined error on `case`.
/// Candidates undefined on the case are dropped unless nobody remaining is
/// defined, in which case the case is skipped.
pub(crate) fn filter_on_case(classing: &EquivalenceClassing, candidates: &mut Vec<usize>, case: usize, eps: f64) {
    let errors = classing.errors();
    let support = classing.support();
    let best = candidates
        .iter()
        .filter(|&&c| support.is_defined(c, case))
        .map(|&c| errors.get(c, case))
        .fold(f64::INFINITY, f64::min);
    if best == f64::INFINITY {
        return;
    }
    let limit = best + eps;
    candidates.retain(|&c| support.is_defined(c, case) && errors.get(c, case) <= limit);
}

/// One lexicase event. Cases are drawn lazily by an incremental
/// Fisher-Yates shuffle, so only as many draws are consumed as cases are
/// examined.
pub(crate) fn lexicase_event(classing: &EquivalenceClassing, eps: Option<&[f64]>, rng: &mut ChaCha8Rng) -> usize {
    let m = classing.n_cases();
    let mut candidates: Vec<usize> = (0..classing.k()).collect();
    let mut cases: Vec<usize> = (0..m).collect();
    for pos in 0..m {
        if candidates.len() == 1 {
            break;
        }
        let pick = rng.random_range(pos..m);
        cases.swap(pos, pick);
        let case = cases[pos];
        filter_on_case(classing, &mut candidates, case, eps.map_or(0.0, |e| e[case]));
    }
    resolve(classing, &candidates, rng)
}

/// Picks one surviving class with probability proportional to its size,
/// which is a uniform choice among the surviving individuals.
pub(crate) fn resolve(classing: &EquivalenceClassing, candidates: &[usize], rng: &mut ChaCha8Rng) -> usize {
    if candidates.len() == 1 {
        return candidates[0];
    }
    let members = classing.members();
    let total: usize = candidates.iter().map(|&c| members[c].len()).sum();
    let mut u = rng.random_range(0..total);
    for &c in candidates {
        let size = members[c].len();
        if u < size {
            return c;
        }
        u -= size;
    }
    unreachable!("draw below total size")
}

/// Survivors of lexicase filtering along a fixed case order. With `eps`,
/// the epsilon keep rule is used.
pub fn lexicase_survivors(classing: &EquivalenceClassing, order: &[usize], eps: Option<&[f64]>) -> Result<Vec<usize>> {
    let m = classing.n_cases();
    if let Some(&bad) = order.iter().find(|&&j| j >= m) {
        return Err(Error::Shape(format!("case {bad} out of range for {m} cases")));
    }
    if eps.is_some_and(|e| e.len() != m) {
        return Err(Error::Shape(format!("epsilon vector length differs from {m} cases")));
    }
    let mut candidates: Vec<usize> = (0..classing.k()).collect();
    for &case in order {
        if candidates.len() == 1 {
            break;
        }
        filter_on_case(classing, &mut candidates, case, eps.map_or(0.0, |e| e[case]));
    }
    Ok(candidates)
}
