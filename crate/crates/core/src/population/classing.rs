use std::collections::HashMap;

use ndarray::Axis;
use rand::Rng;

use super::{ErrorMatrix, RandomSource, SupportMatrix};
use crate::error::{Error, Result};

/// Population grouped by identical (error row, support row) pairs.
///
/// Class order is first-occurrence order in the original population, and
/// each member list is ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClassing {
    class_errors: ErrorMatrix,
    class_support: SupportMatrix,
    members: Vec<Vec<usize>>,
    population: usize,
}

impl EquivalenceClassing {
    /// One class per individual, with no grouping. Useful as the "direct"
    /// population view when checking that grouping does not change
    /// selection probabilities.
    pub fn singletons(errors: ErrorMatrix, support: SupportMatrix) -> Result<Self> {
        support.check_pairing(&errors)?;
        let n = errors.n_rows();
        Ok(Self {
            class_errors: errors,
            class_support: support,
            members: (0..n).map(|i| vec![i]).collect(),
            population: n,
        })
    }

    /// Convenience for full-support instances given as row slices.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let errors = ErrorMatrix::from_rows(rows)?;
        let support = SupportMatrix::full(errors.n_rows(), errors.n_cols());
        build_classes(&errors, &support)
    }

    pub fn errors(&self) -> &ErrorMatrix {
        &self.class_errors
    }

    pub fn support(&self) -> &SupportMatrix {
        &self.class_support
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    /// Number of classes.
    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn n_cases(&self) -> usize {
        self.class_errors.n_cols()
    }

    /// Number of individuals in the original population.
    pub fn population_size(&self) -> usize {
        self.population
    }

    /// Member count of each class, as weights.
    pub fn multiplicities(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.len() as f64).collect()
    }

    /// Class id of every individual.
    pub fn class_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.population];
        for (c, members) in self.members.iter().enumerate() {
            for &i in members {
                out[i] = c;
            }
        }
        out
    }

    /// Restricts every class to a subset of cases. Classes are kept as-is,
    /// so rows may no longer be distinct; rows left without any defined case
    /// are rejected.
    pub fn restrict_cases(&self, cols: &[usize]) -> Result<Self> {
        Ok(Self {
            class_errors: self.class_errors.select_columns(cols)?,
            class_support: self.class_support.select_columns(cols)?,
            members: self.members.clone(),
            population: self.population,
        })
    }

    /// Reorders classes: new class `r` is old class `order[r]`.
    pub fn permute_classes(&self, order: &[usize]) -> Result<Self> {
        let k = self.k();
        let mut seen = vec![false; k];
        for &o in order {
            if o >= k || std::mem::replace(&mut seen[o], true) {
                return Err(Error::Shape(format!("{order:?} is not a permutation of 0..{k}")));
            }
        }
        if order.len() != k {
            return Err(Error::Shape(format!("{order:?} is not a permutation of 0..{k}")));
        }
        let errors = ErrorMatrix::new(self.class_errors.view().select(Axis(0), order))?;
        let support = SupportMatrix::new(self.class_support.view().select(Axis(0), order))?;
        Ok(Self {
            class_errors: errors,
            class_support: support,
            members: order.iter().map(|&o| self.members[o].clone()).collect(),
            population: self.population,
        })
    }
}

/// Groups individuals whose (error row, support row) pairs are identical.
pub fn build_classes(errors: &ErrorMatrix, support: &SupportMatrix) -> Result<EquivalenceClassing> {
    support.check_pairing(errors)?;
    let (n, m) = (errors.n_rows(), errors.n_cols());

    let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(n);
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut firsts: Vec<usize> = Vec::new();
    let mut key = Vec::with_capacity(m + m.div_ceil(64));
    for i in 0..n {
        key.clear();
        // -0.0 and 0.0 compare equal, so they must hash equal.
        key.extend(errors.row(i).iter().map(|&v| if v == 0.0 { 0 } else { v.to_bits() }));
        if !support.is_full() {
            let mut word = 0u64;
            for j in 0..m {
                if support.is_defined(i, j) {
                    word |= 1 << (j % 64);
                }
                if j % 64 == 63 || j + 1 == m {
                    key.push(word);
                    word = 0;
                }
            }
        }
        match index.get(&key) {
            Some(&c) => members[c].push(i),
            None => {
                index.insert(key.clone(), members.len());
                members.push(vec![i]);
                firsts.push(i);
            }
        }
    }

    let class_errors = ErrorMatrix::new(errors.view().select(Axis(0), &firsts))?;
    let class_support = if support.is_full() {
        SupportMatrix::full(firsts.len(), m)
    } else {
        SupportMatrix::new(support.view().select(Axis(0), &firsts))?
    };
    Ok(EquivalenceClassing {
        class_errors,
        class_support,
        members,
        population: n,
    })
}

/// Maps selected classes to individuals, drawing a uniformly random member
/// of each class. Draw `i` uses stream `i` of `rng`.
pub fn expand_class_selection(
    classing: &EquivalenceClassing,
    class_indices: &[usize],
    rng: &RandomSource,
) -> Result<Vec<usize>> {
    let k = classing.k();
    class_indices
        .iter()
        .enumerate()
        .map(|(event, &c)| {
            let members = classing
                .members
                .get(c)
                .ok_or(Error::ClassOutOfRange { index: c, classes: k })?;
            Ok(if members.len() == 1 {
                members[0]
            } else {
                members[rng.stream(event as u64).random_range(0..members.len())]
            })
        })
        .collect()
}
