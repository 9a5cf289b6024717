//! Importance scores and the softmax case weights derived from them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::population::{ErrorMatrix, RandomSource};

/// Shape of the per-case importance-score distribution. Implementations
/// fill one selection event's row with scores whose distribution has
/// standard deviation `pressure`.
pub trait ImportanceDistribution: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn fill_row(&self, pressure: f64, rng: &mut ChaCha8Rng, row: &mut [f64]);
}

/// I.i.d. Gaussian scores, N(0, pressure²).
#[derive(Debug, Clone, Copy, Default)]
pub struct Normal;

impl ImportanceDistribution for Normal {
    fn name(&self) -> &'static str {
        "normal"
    }

    fn fill_row(&self, pressure: f64, rng: &mut ChaCha8Rng, row: &mut [f64]) {
        for v in row {
            *v = pressure * rng.sample::<f64, _>(StandardNormal);
        }
    }
}

/// I.i.d. uniform scores on [-pressure·√3, pressure·√3].
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl ImportanceDistribution for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn fill_row(&self, pressure: f64, rng: &mut ChaCha8Rng, row: &mut [f64]) {
        let half = pressure * 3f64.sqrt();
        for v in row {
            *v = half * (2.0 * rng.random::<f64>() - 1.0);
        }
    }
}

/// A random permutation of `m` evenly spaced values centred at zero, scaled
/// so that their population standard deviation equals the pressure.
///
/// With a large enough spacing every weight row reproduces lexicase
/// selection on the case order given by descending score.
#[derive(Debug, Clone, Copy, Default)]
pub struct ShuffledRange;

impl ShuffledRange {
    /// Gap between adjacent grid values for `m` cases at this pressure.
    pub fn spacing(pressure: f64, m: usize) -> f64 {
        if m < 2 {
            return 0.0;
        }
        pressure / unit_grid_std(m)
    }

    /// Pressure that yields the given grid spacing for `m` cases.
    pub fn pressure_for_spacing(spacing: f64, m: usize) -> f64 {
        spacing * unit_grid_std(m)
    }
}

/// Population standard deviation of `m` points spaced one apart.
fn unit_grid_std(m: usize) -> f64 {
    let m = m as f64;
    ((m * m - 1.0) / 12.0).sqrt()
}

impl ImportanceDistribution for ShuffledRange {
    fn name(&self) -> &'static str {
        "shuffled_range"
    }

    fn fill_row(&self, pressure: f64, rng: &mut ChaCha8Rng, row: &mut [f64]) {
        let m = row.len();
        let spacing = Self::spacing(pressure, m);
        let centre = (m as f64 - 1.0) / 2.0;
        for (i, v) in row.iter_mut().enumerate() {
            *v = (i as f64 - centre) * spacing;
        }
        row.shuffle(rng);
    }
}

/// Spacing above which [`ShuffledRange`] scores make every weighted mean
/// order classes exactly as lexicase does on the induced case order.
///
/// With error range `R` and smallest nonzero gap `d` between two values on
/// the same case, the first case that separates two classes contributes at
/// least `d·w`, and all later cases together at most `R·w/(e^s - 1)`. The
/// first dominates once `s > ln(1 + R/d)`.
pub fn lexicase_exact_spacing(errors: &ErrorMatrix) -> f64 {
    let view = errors.view();
    let (lo, hi) = view
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut min_gap = f64::INFINITY;
    for col in view.columns() {
        let mut vals: Vec<f64> = col.to_vec();
        vals.sort_by(f64::total_cmp);
        for w in vals.windows(2) {
            let gap = w[1] - w[0];
            if gap > 0.0 {
                min_gap = min_gap.min(gap);
            }
        }
    }
    if !min_gap.is_finite() {
        return 0.0;
    }
    (1.0 + (hi - lo) / min_gap).ln()
}

type DistributionMap = BTreeMap<&'static str, Arc<dyn ImportanceDistribution>>;

/// Importance distributions by name.
#[derive(Clone)]
pub struct DistributionRegistry {
    entries: DistributionMap,
}

impl fmt::Debug for DistributionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl Default for DistributionRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl DistributionRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// `normal`, `uniform` and `shuffled_range`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Normal));
        r.register(Arc::new(Uniform));
        r.register(Arc::new(ShuffledRange));
        r
    }

    pub fn register(&mut self, dist: Arc<dyn ImportanceDistribution>) {
        self.entries.insert(dist.name(), dist);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ImportanceDistribution>> {
        self.entries.get(name).cloned().ok_or_else(|| {
            Error::config(
                "distribution",
                format!("unknown distribution `{name}` (known: {})", self.names().join(", ")),
            )
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

/// Raw importance scores, one row per selection event.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceMatrix(Array2<f64>);

impl ImportanceMatrix {
    pub fn new(scores: Array2<f64>) -> Result<Self> {
        if scores.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("importance scores must be finite".into()));
        }
        Ok(Self(scores))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn n_events(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_cases(&self) -> usize {
        self.0.ncols()
    }

    /// Case indices of row `event` in descending score order.
    pub fn case_order(&self, event: usize) -> Vec<usize> {
        let row = self.0.row(event);
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
        order
    }
}

/// Strictly positive case weights; every row sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(Array2<f64>);

impl WeightMatrix {
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn n_events(&self) -> usize {
        self.0.nrows()
    }
}

/// Samples an `n × m` importance matrix. Row `r` comes from stream `r` of
/// `rng`, so rows are independent of each other and of thread scheduling.
pub fn sample_importance(
    n: usize,
    m: usize,
    distribution: &dyn ImportanceDistribution,
    pressure: f64,
    rng: &RandomSource,
) -> Result<ImportanceMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::Shape(format!("importance matrix must be at least 1x1, got {n}x{m}")));
    }
    if !(pressure.is_finite() && pressure >= 0.0) {
        return Err(Error::config("pressure", format!("must be finite and >= 0, got {pressure}")));
    }
    let mut scores = Array2::zeros((n, m));
    if pressure > 0.0 {
        for (r, mut row) in scores.outer_iter_mut().enumerate() {
            let mut stream = rng.stream(r as u64);
            distribution.fill_row(
                pressure,
                &mut stream,
                row.as_slice_mut().expect("rows of a standard-layout array are contiguous"),
            );
        }
    }
    ImportanceMatrix::new(scores)
}

/// Row-wise softmax with the row maximum subtracted first.
///
/// Entries far enough below the maximum underflow to zero in `f64`; every
/// row still has its maximum entry weighted by a positive value.
pub fn softmax_rows(scores: &ImportanceMatrix) -> WeightMatrix {
    let mut w = scores.0.clone();
    for mut row in w.outer_iter_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|s| (s - max).exp());
        let sum = row.sum();
        // Subnormal weights are flushed to zero: they slow the matrix
        // product by orders of magnitude and can only matter when every
        // normally weighted case ties.
        row.mapv_inplace(|v| {
            let w = v / sum;
            if w < f64::MIN_POSITIVE { 0.0 } else { w }
        });
    }
    WeightMatrix(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn weights(row: [f64; 2]) -> Vec<f64> {
        let w = softmax_rows(&ImportanceMatrix::new(array![row]).unwrap());
        w.view().row(0).to_vec()
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(weights([0.0, 0.0]), vec![0.5, 0.5]);
        let w = weights([3f64.ln(), 0.0]);
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
        let w = softmax_rows(&ImportanceMatrix::new(array![[1000.0, 0.0, 0.0]]).unwrap());
        assert!(w.view().iter().all(|v| v.is_finite()));
        assert!((w.view()[[0, 0]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_pressure_is_all_zero() {
        for name in DistributionRegistry::with_builtins().names() {
            let dist = DistributionRegistry::with_builtins().get(name).unwrap();
            let m = sample_importance(4, 5, dist.as_ref(), 0.0, &RandomSource::new(1)).unwrap();
            assert!(m.view().iter().all(|&v| v == 0.0), "{name}");
        }
    }

    #[test]
    fn normal_std_matches_pressure() {
        let m = sample_importance(1000, 1000, &Normal, 20.0, &RandomSource::new(3)).unwrap();
        let n = 1e6;
        let mean = m.view().sum() / n;
        let var = m.view().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        assert!((19.9..=20.1).contains(&sd), "{sd}");
    }

    #[test]
    fn uniform_std_and_support() {
        let m = sample_importance(500, 400, &Uniform, 5.0, &RandomSource::new(4)).unwrap();
        let bound = 5.0 * 3f64.sqrt();
        assert!(m.view().iter().all(|v| v.abs() <= bound));
        let n = 2e5;
        let mean = m.view().sum() / n;
        let sd = (m.view().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((sd - 5.0).abs() < 0.05, "{sd}");
    }

    #[test]
    fn shuffled_range_triple() {
        let p = 7.0;
        let c = p * (1.5f64).sqrt();
        let m = sample_importance(50, 3, &ShuffledRange, p, &RandomSource::new(5)).unwrap();
        for row in m.view().outer_iter() {
            let mut v = row.to_vec();
            v.sort_by(f64::total_cmp);
            assert!((v[0] + c).abs() < 1e-12 && v[1].abs() < 1e-12 && (v[2] - c).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn shuffled_range_population_std_is_pressure() {
        for m in [2usize, 5, 8, 31] {
            let s = sample_importance(1, m, &ShuffledRange, 3.5, &RandomSource::new(0)).unwrap();
            let row = s.view().row(0).to_vec();
            let mean = row.iter().sum::<f64>() / m as f64;
            let sd = (row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64).sqrt();
            assert!((sd - 3.5).abs() < 1e-12 && mean.abs() < 1e-12);
        }
        assert!((ShuffledRange::spacing(ShuffledRange::pressure_for_spacing(2.5, 8), 8) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn unknown_distribution() {
        match DistributionRegistry::with_builtins().get("cauchy") {
            Err(Error::Config { key, .. }) => assert_eq!(key, "distribution"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rows_are_stream_indexed() {
        let a = sample_importance(6, 3, &Normal, 1.0, &RandomSource::new(8)).unwrap();
        let b = sample_importance(3, 3, &Normal, 1.0, &RandomSource::new(8)).unwrap();
        assert_eq!(a.view().slice(ndarray::s![..3, ..]), b.view());
    }

    #[test]
    fn exact_spacing_bound() {
        let e = ErrorMatrix::from_rows(&[[0.0, 5.0], [1.0, 0.0]]).unwrap();
        assert!((lexicase_exact_spacing(&e) - 6f64.ln()).abs() < 1e-12);
    }
}
