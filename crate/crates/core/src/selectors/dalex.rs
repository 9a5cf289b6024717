//! Diversely aggregated lexicase selection.
//!
//! One batched event draws an importance row per selection, softmaxes it into
//! case weights, and picks, for each row, the class with the lowest
//! support-normalized weighted error. All rows are handled by one matrix
//! product.

use std::sync::Arc;

use ndarray::{Array2, ArrayView1, Zip};

use super::importance::{sample_importance, softmax_rows, ImportanceDistribution, ImportanceMatrix, WeightMatrix};
use super::lexicase::resolve;
use super::Selector;
use crate::error::{Error, Result};
use crate::population::{standardize_per_case_masked, EquivalenceClassing, ErrorMatrix, RandomSource, SupportMatrix};

#[derive(Debug, Clone)]
pub struct Dalex {
    pressure: f64,
    distribution: Arc<dyn ImportanceDistribution>,
    relaxed: bool,
}

impl Dalex {
    pub fn new(pressure: f64, distribution: Arc<dyn ImportanceDistribution>, relaxed: bool) -> Result<Self> {
        if !(pressure.is_finite() && pressure >= 0.0) {
            return Err(Error::config("pressure", format!("must be finite and >= 0, got {pressure}")));
        }
        Ok(Self {
            pressure,
            distribution,
            relaxed,
        })
    }

    pub fn pressure(&self) -> f64 {
        self.pressure
    }

    pub fn relaxed(&self) -> bool {
        self.relaxed
    }

    pub fn distribution(&self) -> &dyn ImportanceDistribution {
        self.distribution.as_ref()
    }

    /// Error matrix actually aggregated: the class errors, standardized per
    /// case when relaxed.
    pub fn effective_errors(&self, classing: &EquivalenceClassing) -> Result<ErrorMatrix> {
        if self.relaxed {
            standardize_per_case_masked(classing.errors(), classing.support(), &classing.multiplicities())
        } else {
            Ok(classing.errors().clone())
        }
    }

    pub fn sample_importance(&self, n_events: usize, m: usize, rng: &RandomSource) -> Result<ImportanceMatrix> {
        sample_importance(n_events, m, self.distribution.as_ref(), self.pressure, &rng.derive("importance"))
    }

    /// Selection with caller-supplied importance scores. Ties on the
    /// minimum are broken uniformly using stream `event` of
    /// `rng.derive("ties")`.
    pub fn select_with_importance(
        &self,
        classing: &EquivalenceClassing,
        importance: &ImportanceMatrix,
        rng: &RandomSource,
    ) -> Result<Vec<usize>> {
        if importance.n_cases() != classing.n_cases() {
            return Err(Error::Shape(format!(
                "importance has {} cases, classes have {}",
                importance.n_cases(),
                classing.n_cases()
            )));
        }
        let errors = self.effective_errors(classing)?;
        let support = classing.support();
        let weights = softmax_rows(importance);
        let mut fitness = dalex_fitness(&errors, support, &weights)?;
        if !support.is_full() {
            repair_underflow(&mut fitness, &errors, support, importance);
        }
        Ok(argmin_rows(&fitness, &errors, support, importance, &weights, classing, &rng.derive("ties")))
    }
}

impl Selector for Dalex {
    fn name(&self) -> &str {
        "dalex"
    }

    fn select_classes(&self, classing: &EquivalenceClassing, n_events: usize, rng: &RandomSource) -> Result<Vec<usize>> {
        if n_events == 0 {
            return Ok(Vec::new());
        }
        let importance = self.sample_importance(n_events, classing.n_cases(), rng)?;
        self.select_with_importance(classing, &importance, rng)
    }
}

/// Support-normalized weighted errors, `(E·Wᵀ) ÷ (S·Wᵀ)`, laid out as
/// `n_events × k` (row = event). With full support the denominator is the
/// weight-row sum, which is one, and is skipped.
pub fn dalex_fitness(errors: &ErrorMatrix, support: &SupportMatrix, weights: &WeightMatrix) -> Result<Array2<f64>> {
    if support.n_rows() != errors.n_rows() || support.n_cols() != errors.n_cols() {
        return Err(Error::Shape("support and errors differ in shape".into()));
    }
    if weights.view().ncols() != errors.n_cols() {
        return Err(Error::Shape(format!(
            "weights have {} cases, errors have {}",
            weights.view().ncols(),
            errors.n_cols()
        )));
    }
    let mut fitness = weights.view().dot(&errors.view().t());
    if !support.is_full() {
        let denom = support_denominators(support, weights);
        Zip::from(&mut fitness).and(&denom).for_each(|f, &d| *f /= d);
    }
    Ok(fitness)
}

/// `S·Wᵀ` as `n_events × k`: the total weight on each row's defined cases.
pub fn support_denominators(support: &SupportMatrix, weights: &WeightMatrix) -> Array2<f64> {
    weights.view().dot(&support.view().t())
}

/// Recomputes entries whose denominator underflowed to zero (every defined
/// case of the class weighted below the smallest normal `f64`), shifting the
/// scores by the class's own maximum instead of the row's.
fn repair_underflow(fitness: &mut Array2<f64>, errors: &ErrorMatrix, support: &SupportMatrix, importance: &ImportanceMatrix) {
    let scores = importance.view();
    for ((event, class), f) in fitness.indexed_iter_mut() {
        if f.is_finite() {
            continue;
        }
        let row = scores.row(event);
        let defined = || (0..row.len()).filter(|&j| support.is_defined(class, j));
        let max = defined().map(|j| row[j]).fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for j in defined() {
            let w = (row[j] - max).exp();
            num += w * errors.get(class, j);
            den += w;
        }
        *f = num / den;
    }
}

/// Per row, the class minimizing the fitness. Ties go to a uniformly random
/// individual among the tied classes, drawn from stream `row` of `rng`.
///
/// Summing `E·Wᵀ` in floating point absorbs the contribution of cases whose
/// weight is many orders of magnitude below the leading one (or underflows
/// to zero), so classes that differ only on those cases can come out equal.
/// Under full support every class within rounding distance of the row
/// minimum is therefore re-ranked by the weighted difference of error rows,
/// evaluated from the importance scores; only classes whose difference is
/// exactly zero remain tied.
pub(crate) fn argmin_rows(
    fitness: &Array2<f64>,
    errors: &ErrorMatrix,
    support: &SupportMatrix,
    importance: &ImportanceMatrix,
    weights: &WeightMatrix,
    classing: &EquivalenceClassing,
    rng: &RandomSource,
) -> Vec<usize> {
    let refine = support.is_full();
    let slack = if refine {
        let col_max: Vec<f64> = errors
            .view()
            .columns()
            .into_iter()
            .map(|c| c.iter().fold(0.0, |a: f64, &b| a.max(b.abs())))
            .collect();
        let m = col_max.len() as f64;
        weights
            .view()
            .outer_iter()
            .map(|w| w.iter().zip(&col_max).map(|(w, c)| w * c).sum::<f64>() * 2.0 * (m + 2.0) * f64::EPSILON)
            .collect()
    } else {
        vec![0.0; fitness.nrows()]
    };
    let mut near = Vec::new();
    let mut ties = Vec::new();
    let mut order = Vec::new();
    fitness
        .outer_iter()
        .enumerate()
        .map(|(event, row)| {
            let best = row.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            near.clear();
            near.extend((0..row.len()).filter(|&c| row[c] <= best + slack[event]));
            ties.clear();
            if near.len() > 1 && refine {
                let scores = importance.view();
                let scores = scores.row(event);
                order.clear();
                order.extend(0..scores.len());
                order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
                let mut lead = near[0];
                ties.push(lead);
                for &c in &near[1..] {
                    let d = weighted_difference(errors, c, lead, scores, &order);
                    if d < 0.0 {
                        lead = c;
                        ties.clear();
                        ties.push(c);
                    } else if d == 0.0 {
                        ties.push(c);
                    }
                }
            } else {
                ties.extend(near.iter().copied().filter(|&c| row[c] == best));
            }
            if ties.len() == 1 {
                ties[0]
            } else {
                resolve(classing, &ties, &mut rng.stream(event as u64))
            }
        })
        .collect()
}

/// Sign-faithful `Σ_j w_j (e_aj − e_bj)` for softmax weights `w` of
/// `scores`, given the cases in descending score order.
///
/// Cases are taken in tiers whose weights, relative to the tier's largest,
/// stay above the smallest normal `f64`. Each tier is summed with
/// compensation, cases sharing a score being summed before scaling, so equal
/// weights give exact zeros for rows with equal (small integer) totals. The
/// first tier with a nonzero sum decides; later weights are below
/// `e^-708` of that tier's largest.
fn weighted_difference(errors: &ErrorMatrix, a: usize, b: usize, scores: ArrayView1<'_, f64>, order: &[usize]) -> f64 {
    const TIER_SPAN: f64 = 708.0;
    let mut i = 0;
    while i < order.len() {
        let top = scores[order[i]];
        let mut tier = Neumaier::default();
        while i < order.len() && top - scores[order[i]] < TIER_SPAN {
            let score = scores[order[i]];
            let mut group = Neumaier::default();
            while i < order.len() && scores[order[i]] == score {
                let j = order[i];
                group.add(errors.get(a, j) - errors.get(b, j));
                i += 1;
            }
            tier.add((score - top).exp() * group.sum());
        }
        let d = tier.sum();
        if d != 0.0 {
            return d;
        }
    }
    0.0
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selectors::importance::Normal;
    use ndarray::array;

    fn dalex(pressure: f64) -> Dalex {
        Dalex::new(pressure, Arc::new(Normal), false).unwrap()
    }

    fn freq(sel: &[usize], k: usize) -> Vec<f64> {
        let mut f = vec![0.0; k];
        for &s in sel {
            f[s] += 1.0 / sel.len() as f64;
        }
        f
    }

    #[test]
    fn zero_pressure_is_mean_argmin() {
        let c = EquivalenceClassing::from_rows(&[[1.0, 1.0], [0.0, 3.0]]).unwrap();
        let sel = dalex(0.0).select_classes(&c, 1000, &RandomSource::new(1)).unwrap();
        assert!(sel.iter().all(|&s| s == 0));
    }

    #[test]
    fn symmetric_pair_is_balanced() {
        let c = EquivalenceClassing::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        for p in [0.0, 1.0, 200.0] {
            let sel = dalex(p).select_classes(&c, 50_000, &RandomSource::new(2)).unwrap();
            let f = freq(&sel, 2);
            assert!((f[0] - 0.5).abs() <= 0.01, "pressure {p}: {f:?}");
        }
    }

    #[test]
    fn high_pressure_follows_lexicase_on_dominating_class() {
        let c = EquivalenceClassing::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        let sel = dalex(200.0).select_classes(&c, 50_000, &RandomSource::new(3)).unwrap();
        assert!(freq(&sel, 3)[0] >= 0.99);
    }

    #[test]
    fn partial_support_fitness() {
        let errors = ErrorMatrix::from_rows(&[[2.0, 0.0, 4.0]]).unwrap();
        let support = SupportMatrix::from_rows(&[[true, false, true]]).unwrap();
        let w = [0.25, 0.5, 0.25];
        // Independent scalar evaluation of the ratio.
        let num: f64 = (0..3).map(|j| errors.get(0, j) * w[j]).sum();
        let den: f64 = (0..3).map(|j| if support.is_defined(0, j) { w[j] } else { 0.0 }).sum();
        assert_eq!(num / den, 3.0);
        let scores = ImportanceMatrix::new(array![[0.0, 2f64.ln(), 0.0]]).unwrap();
        let f = dalex_fitness(&errors, &support, &softmax_rows(&scores)).unwrap();
        assert_eq!(f[[0, 0]], 3.0);
    }

    #[test]
    fn ties_use_their_own_stream() {
        let c = EquivalenceClassing::singletons(
            ErrorMatrix::from_rows(&[[1.0], [1.0], [1.0]]).unwrap(),
            SupportMatrix::full(3, 1),
        )
        .unwrap();
        let sel = dalex(5.0).select_classes(&c, 30_000, &RandomSource::new(4)).unwrap();
        for f in freq(&sel, 3) {
            assert!((f - 1.0 / 3.0).abs() < 0.015);
        }
    }

    #[test]
    fn importance_shape_checked() {
        let c = EquivalenceClassing::from_rows(&[[1.0, 2.0]]).unwrap();
        let bad = ImportanceMatrix::new(array![[0.0, 0.0, 0.0]]).unwrap();
        assert!(dalex(1.0).select_with_importance(&c, &bad, &RandomSource::new(0)).is_err());
        assert!(Dalex::new(-1.0, Arc::new(Normal), false).is_err());
    }

    #[test]
    fn absorbed_cases_still_rank() {
        // 4·w0 + 3·w1 rounds to 4·w0 when w1/w0 = e^-100.
        let c = EquivalenceClassing::from_rows(&[[4.0, 3.0], [4.0, 0.0]]).unwrap();
        let scores = ImportanceMatrix::new(array![[0.0, -100.0], [0.0, -1000.0]]).unwrap();
        let naive = dalex_fitness(c.errors(), c.support(), &softmax_rows(&scores)).unwrap();
        assert_eq!(naive[[0, 0]], naive[[0, 1]]);
        let sel = dalex(1.0).select_with_importance(&c, &scores, &RandomSource::new(5)).unwrap();
        assert_eq!(sel, vec![1, 1]);
    }

    #[test]
    fn exact_zero_difference_stays_tied() {
        // Equal totals under equal weights.
        let c = EquivalenceClassing::from_rows(&[[2.0, 0.0, 1.0], [1.0, 1.0, 1.0], [0.0, 3.0, 0.0]]).unwrap();
        let sel = dalex(0.0).select_classes(&c, 30_000, &RandomSource::new(6)).unwrap();
        for f in freq(&sel, 3) {
            assert!((f - 1.0 / 3.0).abs() < 0.015, "{f}");
        }
    }

    #[test]
    fn ties_weighted_by_class_size() {
        let errors = ErrorMatrix::from_rows(&[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]).unwrap();
        let support = SupportMatrix::from_rows(&[[true, true], [true, true], [true, true], [true, false]]).unwrap();
        let c = crate::population::build_classes(&errors, &support).unwrap();
        assert_eq!(c.k(), 2);
        let sel = dalex(3.0).select_individuals(&c, 40_000, &RandomSource::new(7)).unwrap();
        for f in freq(&sel, 4) {
            assert!((f - 0.25).abs() < 0.01, "{f}");
        }
    }

    #[test]
    fn underflowed_denominator_is_recomputed() {
        let errors = ErrorMatrix::from_rows(&[[0.0, 2.0], [1.0, 0.0]]).unwrap();
        let support = SupportMatrix::from_rows(&[[false, true], [true, true]]).unwrap();
        let c = EquivalenceClassing::singletons(errors, support).unwrap();
        let scores = ImportanceMatrix::new(array![[0.0, -800.0]]).unwrap();
        let naive = dalex_fitness(c.errors(), c.support(), &softmax_rows(&scores)).unwrap();
        assert!(naive[[0, 0]].is_nan());
        // Class 0 is only defined on case 1, so its average is 2; class 1's is ~1.
        let sel = dalex(1.0).select_with_importance(&c, &scores, &RandomSource::new(8)).unwrap();
        assert_eq!(sel, vec![1]);
    }
}
