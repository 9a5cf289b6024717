//! Timing of batched selection events on generated error matrices.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{build_classes, ErrorMatrix, RandomSource, SupportMatrix};
use crate::selectors::{SelectorConfig, SelectorRegistry};
use crate::stats::quantile_sorted;

/// Shape of the generated error data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Integer errors in `0..=5`; many ties.
    Discrete,
    /// Every case column holds pairwise distinct real errors.
    ContinuousAllDistinct,
    /// Discrete errors, each entry defined with probability one half
    /// (at least one defined case per row).
    PartialSupport,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Discrete, Regime::ContinuousAllDistinct, Regime::PartialSupport];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Discrete => "discrete",
            Regime::ContinuousAllDistinct => "continuous_all_distinct",
            Regime::PartialSupport => "partial_support",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::config("regime", format!("unknown regime `{s}`")))
    }
}

/// Generates an `n × m` instance of `regime`.
pub fn generate(regime: Regime, n: usize, m: usize, rng: &RandomSource) -> Result<(ErrorMatrix, SupportMatrix)> {
    if n == 0 || m == 0 {
        return Err(Error::Empty("benchmark matrix"));
    }
    let mut r = rng.stream(0);
    match regime {
        Regime::Discrete => {
            let e = Array2::from_shape_fn((n, m), |_| r.random_range(0..=5) as f64);
            Ok((ErrorMatrix::new(e)?, SupportMatrix::full(n, m)))
        }
        Regime::ContinuousAllDistinct => {
            // A shuffled rank plus jitter below one keeps each column distinct.
            let mut e = Array2::zeros((n, m));
            let mut ranks: Vec<usize> = (0..n).collect();
            for mut col in e.columns_mut() {
                ranks.shuffle(&mut r);
                for (x, &rank) in col.iter_mut().zip(&ranks) {
                    *x = rank as f64 + r.random::<f64>() * 0.5;
                }
            }
            Ok((ErrorMatrix::new(e)?, SupportMatrix::full(n, m)))
        }
        Regime::PartialSupport => {
            let mut mask = Array2::from_shape_fn((n, m), |_| r.random_bool(0.5));
            for mut row in mask.rows_mut() {
                if !row.iter().any(|&d| d) {
                    row[r.random_range(0..m)] = true;
                }
            }
            let e = Array2::from_shape_fn((n, m), |(i, j)| if mask[[i, j]] { r.random_range(0..=5) as f64 } else { 0.0 });
            let rows: Vec<Vec<bool>> = mask.rows().into_iter().map(|row| row.to_vec()).collect();
            Ok((ErrorMatrix::new(e)?, SupportMatrix::from_rows(&rows)?))
        }
    }
}

/// One benchmark cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: String,
    pub n: usize,
    pub m: usize,
    pub regime: Regime,
    pub repetitions: usize,
    pub median_seconds: f64,
    pub iqr_seconds: f64,
    pub parallel: bool,
    /// FNV-1a hash of the selected indices, identical across repetitions.
    pub selection_checksum: u64,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub regimes: Vec<Regime>,
    pub methods: Vec<SelectorConfig>,
    pub repetitions: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            ns: vec![1000],
            ms: vec![200],
            regimes: vec![Regime::ContinuousAllDistinct],
            methods: vec![SelectorConfig::dalex(200.0), SelectorConfig::new("lexicase")],
            repetitions: 5,
            seed: 0,
            parallel: false,
        }
    }
}

/// Per-repetition wall times of one batched selection event, plus its result.
#[derive(Debug, Clone)]
pub struct Timing {
    pub seconds: Vec<f64>,
    pub selected: Vec<usize>,
}

impl Timing {
    pub fn median(&self) -> f64 {
        quantile_sorted(&self.sorted(), 0.5)
    }

    pub fn iqr(&self) -> f64 {
        let s = self.sorted();
        quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
    }

    fn sorted(&self) -> Vec<f64> {
        let mut s = self.seconds.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Times `repetitions` batched selection events (after one warm-up), each
/// going from the raw matrix to `n` selected individual indices, class
/// grouping included. Every repetition uses the same seed.
pub fn time_selection(
    registry: &SelectorRegistry,
    method: &SelectorConfig,
    errors: &ErrorMatrix,
    support: &SupportMatrix,
    repetitions: usize,
    rng: &RandomSource,
) -> Result<Timing> {
    if repetitions < 3 {
        return Err(Error::config("repetitions", "must be >= 3"));
    }
    let selector = registry.build(method)?;
    let n = errors.n_rows();
    let event = || -> Result<Vec<usize>> {
        let classing = build_classes(errors, support)?;
        selector.select_individuals(&classing, n, rng)
    };
    let selected = event()?;
    let mut seconds = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        let picked = event()?;
        seconds.push(start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE));
        debug_assert_eq!(picked, selected);
    }
    Ok(Timing { seconds, selected })
}

/// Runs every (regime, n, m, method) cell. Each (regime, n, m) matrix is
/// generated once and shared by all methods.
pub fn run_bench(registry: &SelectorRegistry, cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.ns.is_empty() || cfg.ms.is_empty() || cfg.regimes.is_empty() || cfg.methods.is_empty() {
        return Err(Error::Empty("benchmark grid"));
    }
    let root = RandomSource::new(cfg.seed);
    let mut out = Vec::new();
    for &regime in &cfg.regimes {
        for &n in &cfg.ns {
            for &m in &cfg.ms {
                let cell = root.derive(regime.as_str()).derive_index(n as u64).derive_index(m as u64);
                let (errors, support) = generate(regime, n, m, &cell.derive("data"))?;
                for method in &cfg.methods {
                    let method = SelectorConfig {
                        parallel: cfg.parallel,
                        ..method.clone()
                    };
                    let t = time_selection(registry, &method, &errors, &support, cfg.repetitions, &cell.derive("select"))?;
                    out.push(BenchRecord {
                        method: method.label(),
                        n,
                        m,
                        regime,
                        repetitions: cfg.repetitions,
                        median_seconds: t.median(),
                        iqr_seconds: t.iqr(),
                        parallel: cfg.parallel,
                        selection_checksum: checksum(&t.selected),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Writes records as CSV with a header row. Floats use shortest
/// round-trip formatting.
pub fn write_csv<W: Write>(records: &[BenchRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(csv_io)?;
    }
    wr.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// FNV-1a over the little-endian bytes of each index.
pub fn checksum(indices: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &i in indices {
        for b in (i as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
