//! Synthetic problems with specialist structure: each case can be solved by
//! a different part of the genome, so aggregate-fitness and lexicase-style
//! selection behave observably differently.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::RandomSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Train(usize),
    Test(usize),
}

/// A problem over variable-length integer genomes.
pub trait Problem: Send + Sync {
    fn name(&self) -> &str;

    fn n_train(&self) -> usize;

    fn n_test(&self) -> usize;

    /// Tokens are drawn from `0..n_tokens()`.
    fn n_tokens(&self) -> u32;

    fn initial_length(&self) -> usize;

    /// Error on `case`, or `None` if the genome is not defined there.
    fn evaluate(&self, genome: &[u32], case: Case) -> Option<f64>;

    /// Error assigned to genomes that cannot be evaluated (empty genomes,
    /// rules matching nothing).
    fn worst_error(&self) -> f64;

    /// Largest error that still counts as solved.
    fn success_tolerance(&self) -> f64 {
        0.0
    }

    /// Zero (within tolerance) error on every train and test case the
    /// genome is defined on, and defined somewhere.
    fn is_solution(&self, genome: &[u32]) -> bool {
        if genome.is_empty() {
            return false;
        }
        let tol = self.success_tolerance();
        let cases = (0..self.n_train()).map(Case::Train).chain((0..self.n_test()).map(Case::Test));
        let mut defined = false;
        for case in cases {
            if let Some(e) = self.evaluate(genome, case) {
                if e > tol {
                    return false;
                }
                defined = true;
            }
        }
        defined
    }
}

/// Problem selection and sizing, as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    /// `discrete_vector`, `continuous_vector` or `partial_support`.
    pub kind: String,
    pub cases: usize,
    pub test_cases: usize,
    /// Independent output slots (vector problems).
    pub regions: usize,
    /// Targets lie in `[-target_range, target_range]` (vector problems).
    pub target_range: i32,
    pub initial_length: usize,
    pub seed: u64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            kind: "discrete_vector".into(),
            cases: 20,
            test_cases: 20,
            regions: 10,
            target_range: 6,
            initial_length: 20,
            seed: 0,
        }
    }
}

pub fn build_problem(cfg: &ProblemConfig) -> Result<Box<dyn Problem>> {
    Ok(match cfg.kind.as_str() {
        "discrete_vector" => Box::new(DiscreteVector::new(cfg)?),
        "continuous_vector" => Box::new(ContinuousVector::new(cfg)?),
        "partial_support" => Box::new(MultiplexerRules::new(cfg)?),
        other => {
            return Err(Error::config(
                "problem.kind",
                format!("unknown problem `{other}` (known: discrete_vector, continuous_vector, partial_support)"),
            ))
        }
    })
}

/// Shared layout of the vector problems: each token adds a step to one
/// region's running value, and case `j` reads region `j mod regions`.
#[derive(Debug, Clone)]
struct RegionLayout {
    regions: usize,
    cases: usize,
    test_cases: usize,
    initial_length: usize,
}

impl RegionLayout {
    fn new(cfg: &ProblemConfig) -> Result<Self> {
        if cfg.regions == 0 {
            return Err(Error::config("problem.regions", "must be >= 1"));
        }
        if cfg.cases < cfg.regions {
            return Err(Error::config(
                "problem.cases",
                format!("need at least one case per region ({} regions)", cfg.regions),
            ));
        }
        if cfg.target_range < 1 {
            return Err(Error::config("problem.target_range", "must be >= 1"));
        }
        Ok(Self {
            regions: cfg.regions,
            cases: cfg.cases,
            test_cases: cfg.test_cases,
            initial_length: cfg.initial_length,
        })
    }

    fn region(&self, case: Case) -> usize {
        match case {
            Case::Train(j) => j % self.regions,
            // Test cases visit regions in a different order.
            Case::Test(j) => (j * 7 + 3) % self.regions,
        }
    }

    /// Per-region sum of token steps.
    fn values(&self, genome: &[u32], steps: &[f64; 4]) -> Vec<f64> {
        let mut v = vec![0.0; self.regions];
        for &t in genome {
            v[(t / 4) as usize % self.regions] += steps[(t % 4) as usize];
        }
        v
    }
}

/// Integer targets, absolute error.
#[derive(Debug, Clone)]
pub struct DiscreteVector {
    layout: RegionLayout,
    targets: Vec<f64>,
    range: f64,
}

const INTEGER_STEPS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];

impl DiscreteVector {
    pub fn new(cfg: &ProblemConfig) -> Result<Self> {
        let layout = RegionLayout::new(cfg)?;
        let mut rng = RandomSource::new(cfg.seed).derive("discrete_vector").stream(0);
        let r = cfg.target_range;
        let targets = (0..cfg.regions).map(|_| f64::from(rng.random_range(-r..=r))).collect();
        Ok(Self {
            layout,
            targets,
            range: f64::from(r),
        })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }
}

impl Problem for DiscreteVector {
    fn name(&self) -> &str {
        "discrete_vector"
    }

    fn n_train(&self) -> usize {
        self.layout.cases
    }

    fn n_test(&self) -> usize {
        self.layout.test_cases
    }

    fn n_tokens(&self) -> u32 {
        4 * self.layout.regions as u32
    }

    fn initial_length(&self) -> usize {
        self.layout.initial_length
    }

    fn evaluate(&self, genome: &[u32], case: Case) -> Option<f64> {
        if genome.is_empty() {
            return Some(self.worst_error());
        }
        let r = self.layout.region(case);
        // Only region r matters; skip building the full vector.
        let v: f64 = genome
            .iter()
            .filter(|&&t| (t / 4) as usize % self.layout.regions == r)
            .map(|&t| INTEGER_STEPS[(t % 4) as usize])
            .sum();
        Some((v - self.targets[r]).abs())
    }

    fn worst_error(&self) -> f64 {
        4.0 * self.range
    }
}

/// Real targets plus small fixed per-case noise, squared error.
#[derive(Debug, Clone)]
pub struct ContinuousVector {
    layout: RegionLayout,
    targets: Vec<f64>,
    train_noise: Vec<f64>,
    test_noise: Vec<f64>,
    range: f64,
}

const REAL_STEPS: [f64; 4] = [-0.5, -0.25, 0.25, 0.5];
const NOISE_SD: f64 = 0.01;
const NOISE_CLIP: f64 = 0.03;

impl ContinuousVector {
    pub fn new(cfg: &ProblemConfig) -> Result<Self> {
        let layout = RegionLayout::new(cfg)?;
        let src = RandomSource::new(cfg.seed).derive("continuous_vector");
        let mut rng = src.stream(0);
        let r = cfg.target_range;
        // Multiples of 0.25, reachable by the token steps.
        let targets = (0..cfg.regions)
            .map(|_| f64::from(rng.random_range(-2 * r..=2 * r)) * 0.25)
            .collect();
        let noise = |n: usize, stream: u64| -> Vec<f64> {
            let mut rng = src.stream(stream);
            (0..n)
                .map(|_| (NOISE_SD * rng.sample::<f64, _>(StandardNormal)).clamp(-NOISE_CLIP, NOISE_CLIP))
                .collect()
        };
        Ok(Self {
            train_noise: noise(cfg.cases, 1),
            test_noise: noise(cfg.test_cases, 2),
            layout,
            targets,
            range: f64::from(r),
        })
    }
}

impl Problem for ContinuousVector {
    fn name(&self) -> &str {
        "continuous_vector"
    }

    fn n_train(&self) -> usize {
        self.layout.cases
    }

    fn n_test(&self) -> usize {
        self.layout.test_cases
    }

    fn n_tokens(&self) -> u32 {
        4 * self.layout.regions as u32
    }

    fn initial_length(&self) -> usize {
        self.layout.initial_length
    }

    fn evaluate(&self, genome: &[u32], case: Case) -> Option<f64> {
        if genome.is_empty() {
            return Some(self.worst_error());
        }
        let r = self.layout.region(case);
        let v = self.layout.values(genome, &REAL_STEPS)[r];
        let target = self.targets[r]
            + match case {
                Case::Train(j) => self.train_noise[j],
                Case::Test(j) => self.test_noise[j],
            };
        Some((v - target).powi(2))
    }

    fn worst_error(&self) -> f64 {
        (4.0 * self.range).powi(2)
    }

    fn success_tolerance(&self) -> f64 {
        // Exact region values leave at most NOISE_CLIP of error.
        0.05 * 0.05
    }
}

/// Rule individuals for the 6-bit multiplexer. A genome decodes to one
/// condition-action rule; the rule is defined only on inputs its condition
/// matches, with error 0 when its action equals the label and 1 otherwise.
#[derive(Debug, Clone)]
pub struct MultiplexerRules {
    train_inputs: Vec<u8>,
    test_inputs: Vec<u8>,
    initial_length: usize,
}

const MUX_BITS: usize = 6;
const INPUTS: usize = 1 << MUX_BITS;
/// Accurate rules for the 6-multiplexer match at most this many inputs.
const MAX_ACCURATE_COVER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symbol {
    Zero,
    One,
    Any,
}

impl MultiplexerRules {
    pub fn new(cfg: &ProblemConfig) -> Result<Self> {
        if cfg.cases == 0 || cfg.cases + cfg.test_cases > INPUTS {
            return Err(Error::config(
                "problem.cases",
                format!("partial_support needs 1 <= cases and cases + test_cases <= {INPUTS}"),
            ));
        }
        let mut inputs: Vec<u8> = (0..INPUTS as u8).collect();
        inputs.shuffle(&mut RandomSource::new(cfg.seed).derive("partial_support").stream(0));
        Ok(Self {
            train_inputs: inputs[..cfg.cases].to_vec(),
            test_inputs: inputs[cfg.cases..cfg.cases + cfg.test_cases].to_vec(),
            initial_length: cfg.initial_length,
        })
    }

    pub fn label(x: u8) -> bool {
        let address = (x & 1) << 1 | (x >> 1 & 1);
        x >> (2 + address) & 1 == 1
    }

    fn decode(genome: &[u32]) -> ([Symbol; MUX_BITS], bool) {
        let mut cond = [Symbol::Any; MUX_BITS];
        let mut action = false;
        for &t in genome {
            let t = t as usize;
            if t < 3 * MUX_BITS {
                cond[t / 3] = [Symbol::Zero, Symbol::One, Symbol::Any][t % 3];
            } else {
                action = t == 3 * MUX_BITS + 1;
            }
        }
        (cond, action)
    }

    fn matches(cond: &[Symbol; MUX_BITS], x: u8) -> bool {
        cond.iter().enumerate().all(|(i, s)| match s {
            Symbol::Any => true,
            Symbol::Zero => x >> i & 1 == 0,
            Symbol::One => x >> i & 1 == 1,
        })
    }
}

impl Problem for MultiplexerRules {
    fn name(&self) -> &str {
        "partial_support"
    }

    fn n_train(&self) -> usize {
        self.train_inputs.len()
    }

    fn n_test(&self) -> usize {
        self.test_inputs.len()
    }

    fn n_tokens(&self) -> u32 {
        3 * MUX_BITS as u32 + 2
    }

    fn initial_length(&self) -> usize {
        self.initial_length
    }

    fn evaluate(&self, genome: &[u32], case: Case) -> Option<f64> {
        if genome.is_empty() {
            return Some(self.worst_error());
        }
        let x = match case {
            Case::Train(j) => self.train_inputs[j],
            Case::Test(j) => self.test_inputs[j],
        };
        let (cond, action) = Self::decode(genome);
        Self::matches(&cond, x).then(|| if action == Self::label(x) { 0.0 } else { 1.0 })
    }

    fn worst_error(&self) -> f64 {
        1.0
    }

    /// A maximally general accurate rule: correct on every input it matches
    /// across the whole input space, and matching as many inputs as any
    /// accurate rule can.
    fn is_solution(&self, genome: &[u32]) -> bool {
        if genome.is_empty() {
            return false;
        }
        let (cond, action) = Self::decode(genome);
        let matched: Vec<u8> = (0..INPUTS as u8).filter(|&x| Self::matches(&cond, x)).collect();
        matched.len() >= MAX_ACCURATE_COVER && matched.iter().all(|&x| Self::label(x) == action)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: &str) -> ProblemConfig {
        ProblemConfig {
            kind: kind.into(),
            ..ProblemConfig::default()
        }
    }

    #[test]
    fn discrete_solution_by_construction() {
        let p = DiscreteVector::new(&cfg("discrete_vector")).unwrap();
        let mut genome = Vec::new();
        for (r, &t) in p.targets().iter().enumerate() {
            let step = if t >= 0.0 { 2 } else { 1 }; // +1 or -1
            for _ in 0..(t.abs() as usize) {
                genome.push((4 * r + step) as u32);
            }
        }
        genome.push(2);
        genome.push(1); // +1 then -1 on region 0 cancels
        assert!(p.is_solution(&genome));
        for j in 0..p.n_train() {
            assert_eq!(p.evaluate(&genome, Case::Train(j)), Some(0.0));
        }
    }

    #[test]
    fn empty_genome_is_worst() {
        for kind in ["discrete_vector", "continuous_vector", "partial_support"] {
            let p = build_problem(&cfg(kind)).unwrap();
            assert_eq!(p.evaluate(&[], Case::Train(0)), Some(p.worst_error()));
            assert!(!p.is_solution(&[]));
        }
    }

    #[test]
    fn evaluation_is_deterministic() {
        for kind in ["discrete_vector", "continuous_vector", "partial_support"] {
            let a = build_problem(&cfg(kind)).unwrap();
            let b = build_problem(&cfg(kind)).unwrap();
            let g: Vec<u32> = (0..15).map(|i| (i * 5) % a.n_tokens()).collect();
            for j in 0..a.n_train() {
                assert_eq!(a.evaluate(&g, Case::Train(j)), b.evaluate(&g, Case::Train(j)));
            }
        }
    }

    #[test]
    fn continuous_errors_are_distinct_and_solvable() {
        let c = ProblemConfig {
            regions: 2,
            cases: 6,
            ..cfg("continuous_vector")
        };
        let p = ContinuousVector::new(&c).unwrap();
        let g = vec![2u32];
        let errs: Vec<f64> = (0..6).map(|j| p.evaluate(&g, Case::Train(j)).unwrap()).collect();
        let mut sorted = errs.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        assert_eq!(sorted.len(), 6);

        let mut genome = Vec::new();
        for (r, &t) in p.targets.iter().enumerate() {
            let step = if t >= 0.0 { 2 } else { 1 }; // +0.25 / -0.25
            for _ in 0..((t.abs() / 0.25).round() as usize) {
                genome.push((4 * r + step) as u32);
            }
        }
        genome.push(2);
        genome.push(1);
        assert!(p.is_solution(&genome));
    }

    #[test]
    fn multiplexer_rules() {
        let p = MultiplexerRules::new(&cfg("partial_support")).unwrap();
        // address bits x0=0, x1=0 -> reads bit 2. Rule "0 0 1 # # # -> 1".
        let genome = vec![0, 3, 7, 3 * 6 + 1];
        assert!(p.is_solution(&genome));
        // Same condition, wrong action.
        assert!(!p.is_solution(&[0, 3, 7, 3 * 6]));
        // Too specific: accurate but not maximally general.
        assert!(!p.is_solution(&[0, 3, 7, 9, 3 * 6 + 1]));
        // A rule with a condition defines only a subset of cases.
        let defined = (0..p.n_train()).filter(|&j| p.evaluate(&genome, Case::Train(j)).is_some()).count();
        assert!(defined < p.n_train());
        assert_eq!(MultiplexerRules::label(0b000100), true);
        assert_eq!(MultiplexerRules::label(0b000000), false);
    }

    #[test]
    fn config_errors_name_keys() {
        let bad = ProblemConfig {
            kind: "maze".into(),
            ..ProblemConfig::default()
        };
        assert!(matches!(build_problem(&bad), Err(Error::Config { ref key, .. }) if key == "problem.kind"));
        let bad = ProblemConfig {
            cases: 5,
            ..ProblemConfig::default()
        };
        assert!(build_problem(&bad).is_err());
        let bad = ProblemConfig {
            cases: 60,
            ..cfg("partial_support")
        };
        assert!(build_problem(&bad).is_err());
    }
}
