//! Exact lexicase selection probabilities for small instances, and
//! empirical distributions for any selector.
//!
//! The exact routine recurses over (remaining candidates, remaining cases):
//! with one candidate left it is selected; with no cases left the remaining
//! candidates are equally likely; otherwise every remaining case is equally
//! likely to come next. This is equivalent to enumerating all case orders
//! but shares work between orders with a common prefix set.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{EquivalenceClassing, RandomSource};
use crate::selectors::{epsilon_for_cases, Selector, SelectorConfig};

pub const MAX_EXACT_CASES: usize = 12;
pub const MAX_EXACT_CLASSES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    Exact,
    Empirical { n_samples: usize },
}

/// Probability vector over classes or individuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDistribution {
    #[serde(flatten)]
    pub kind: DistributionKind,
    pub probs: Vec<f64>,
}

impl SelectionDistribution {
    pub fn new(probs: Vec<f64>, kind: DistributionKind) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty("selection distribution"));
        }
        if probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::Distribution("entries must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Distribution(format!("entries sum to {total}, not 1")));
        }
        Ok(Self { kind, probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Spreads each class's probability evenly over its members.
    pub fn to_individuals(&self, classing: &EquivalenceClassing) -> Result<Self> {
        if self.probs.len() != classing.k() {
            return Err(Error::Shape(format!(
                "distribution has {} entries for {} classes",
                self.probs.len(),
                classing.k()
            )));
        }
        let mut out = vec![0.0; classing.population_size()];
        for (p, members) in self.probs.iter().zip(classing.members()) {
            let share = p / members.len() as f64;
            for &i in members {
                out[i] = share;
            }
        }
        Ok(Self {
            kind: self.kind,
            probs: out,
        })
    }
}

/// Frequency vector of `selections` over `n_outcomes` outcomes. No smoothing.
pub fn empirical_distribution(selections: &[usize], n_outcomes: usize) -> Result<SelectionDistribution> {
    if selections.is_empty() {
        return Err(Error::Empty("selections"));
    }
    if n_outcomes == 0 {
        return Err(Error::Empty("outcomes"));
    }
    let mut counts = vec![0usize; n_outcomes];
    for &s in selections {
        *counts.get_mut(s).ok_or(Error::ClassOutOfRange {
            index: s,
            classes: n_outcomes,
        })? += 1;
    }
    let n = selections.len() as f64;
    Ok(SelectionDistribution {
        kind: DistributionKind::Empirical {
            n_samples: selections.len(),
        },
        probs: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// Runs `selector` for `n_samples` events and returns the class frequencies.
pub fn sample_class_distribution(
    selector: &dyn Selector,
    classing: &EquivalenceClassing,
    n_samples: usize,
    rng: &RandomSource,
) -> Result<SelectionDistribution> {
    let sel = selector.select_classes(classing, n_samples, rng)?;
    empirical_distribution(&sel, classing.k())
}

/// Runs `selector` for `n_samples` events (classes then members) and
/// returns the individual frequencies.
pub fn sample_individual_distribution(
    selector: &dyn Selector,
    classing: &EquivalenceClassing,
    n_samples: usize,
    rng: &RandomSource,
) -> Result<SelectionDistribution> {
    let sel = selector.select_individuals(classing, n_samples, rng)?;
    empirical_distribution(&sel, classing.population_size())
}

pub fn check_exact_size(classing: &EquivalenceClassing) -> Result<()> {
    if classing.n_cases() > MAX_EXACT_CASES || classing.k() > MAX_EXACT_CLASSES {
        return Err(Error::TooLarge {
            classes: classing.k(),
            cases: classing.n_cases(),
            max_classes: MAX_EXACT_CLASSES,
            max_cases: MAX_EXACT_CASES,
        });
    }
    Ok(())
}

/// Exact lexicase selection probabilities over classes.
pub fn exact_lexicase_probs(classing: &EquivalenceClassing) -> Result<SelectionDistribution> {
    exact_probs(classing, &vec![0.0; classing.n_cases()], true)
}

/// Exact epsilon-lexicase probabilities with the given per-case epsilons.
pub fn exact_epsilon_lexicase_probs(classing: &EquivalenceClassing, epsilons: &[f64]) -> Result<SelectionDistribution> {
    if epsilons.len() != classing.n_cases() {
        return Err(Error::Shape(format!(
            "{} epsilons for {} cases",
            epsilons.len(),
            classing.n_cases()
        )));
    }
    if epsilons.iter().any(|&e| !(e >= 0.0 && e.is_finite())) {
        return Err(Error::Shape("epsilons must be finite and >= 0".into()));
    }
    exact_probs(classing, epsilons, true)
}

/// Exact class distribution for methods that have an oracle (`lexicase`,
/// `epsilon_lexicase`); `None` for every other method.
pub fn exact_method_distribution(
    method: &SelectorConfig,
    classing: &EquivalenceClassing,
) -> Result<Option<SelectionDistribution>> {
    match method.method.as_str() {
        "lexicase" => exact_lexicase_probs(classing).map(Some),
        "epsilon_lexicase" => exact_epsilon_lexicase_probs(classing, &epsilon_for_cases(classing)).map(Some),
        _ => Ok(None),
    }
}

/// The same recursion without the memo table; kept as a cross-check.
pub fn exact_lexicase_probs_unmemoized(classing: &EquivalenceClassing) -> Result<SelectionDistribution> {
    exact_probs(classing, &vec![0.0; classing.n_cases()], false)
}

fn exact_probs(classing: &EquivalenceClassing, eps: &[f64], memoize: bool) -> Result<SelectionDistribution> {
    check_exact_size(classing)?;
    let k = classing.k();
    let m = classing.n_cases();
    let mut rec = Recursion {
        classing,
        eps,
        memo: memoize.then(HashMap::new),
    };
    let all_candidates = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let all_cases = (1u32 << m) - 1;
    let probs = rec.probs(all_candidates, all_cases);
    Ok(SelectionDistribution {
        kind: DistributionKind::Exact,
        probs: probs.to_vec(),
    })
}

struct Recursion<'a> {
    classing: &'a EquivalenceClassing,
    eps: &'a [f64],
    memo: Option<HashMap<(u64, u32), Rc<[f64]>>>,
}

impl Recursion<'_> {
    fn probs(&mut self, candidates: u64, cases: u32) -> Rc<[f64]> {
        if let Some(hit) = self.memo.as_ref().and_then(|m| m.get(&(candidates, cases))) {
            return Rc::clone(hit);
        }
        let k = self.classing.k();
        let mut out = vec![0.0; k];
        let alive = candidates.count_ones();
        if alive == 1 {
            out[candidates.trailing_zeros() as usize] = 1.0;
        } else if cases == 0 {
            // Survivors are chosen uniformly by individual.
            let members = self.classing.members();
            let alive_members: usize = (0..k).filter(|&c| candidates >> c & 1 == 1).map(|c| members[c].len()).sum();
            for (c, p) in out.iter_mut().enumerate() {
                if candidates >> c & 1 == 1 {
                    *p = members[c].len() as f64 / alive_members as f64;
                }
            }
        } else {
            // Ascending case index fixes the summation order.
            for t in 0..self.classing.n_cases() {
                if cases >> t & 1 == 0 {
                    continue;
                }
                let next = self.filter(candidates, t);
                let sub = self.probs(next, cases & !(1 << t));
                for (o, s) in out.iter_mut().zip(sub.iter()) {
                    *o += s;
                }
            }
            let n_cases = f64::from(cases.count_ones());
            for o in &mut out {
                *o /= n_cases;
            }
        }
        let out: Rc<[f64]> = out.into();
        if let Some(memo) = self.memo.as_mut() {
            memo.insert((candidates, cases), Rc::clone(&out));
        }
        out
    }

    fn filter(&self, candidates: u64, case: usize) -> u64 {
        let errors = self.classing.errors();
        let support = self.classing.support();
        let alive = (0..self.classing.k()).filter(|&c| candidates >> c & 1 == 1);
        let best = alive
            .clone()
            .filter(|&c| support.is_defined(c, case))
            .map(|c| errors.get(c, case))
            .fold(f64::INFINITY, f64::min);
        if best == f64::INFINITY {
            return candidates;
        }
        let limit = best + self.eps[case];
        alive
            .filter(|&c| support.is_defined(c, case) && errors.get(c, case) <= limit)
            .fold(0u64, |acc, c| acc | 1 << c)
    }
}
