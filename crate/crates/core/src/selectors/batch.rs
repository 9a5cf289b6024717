//! Batch-lexicase: lexicase over consecutive groups of shuffled cases,
//! filtering on each candidate's mean error over the group.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::BatchThreshold;
use super::lexicase::{resolve, run_events};
use super::Selector;
use crate::error::{Error, Result};
use crate::population::{EquivalenceClassing, RandomSource};
use crate::stats::weighted_mad;

#[derive(Debug, Clone)]
pub struct BatchLexicase {
    batch_size: usize,
    threshold: BatchThreshold,
    parallel: bool,
}

impl BatchLexicase {
    pub fn new(batch_size: usize, threshold: BatchThreshold, parallel: bool) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        Ok(Self {
            batch_size,
            threshold,
            parallel,
        })
    }

    fn event(&self, classing: &EquivalenceClassing, rng: &mut ChaCha8Rng) -> usize {
        let m = classing.n_cases();
        let size = self.batch_size.min(m);
        let mut candidates: Vec<usize> = (0..classing.k()).collect();
        let mut cases: Vec<usize> = (0..m).collect();
        let mut pos = 0;
        while pos < m && candidates.len() > 1 {
            let end = (pos + size).min(m);
            for i in pos..end {
                let pick = rng.random_range(i..m);
                cases.swap(i, pick);
            }
            filter_on_batch(classing, &mut candidates, &cases[pos..end], self.threshold);
            pos = end;
        }
        resolve(classing, &candidates, rng)
    }
}

impl Selector for BatchLexicase {
    fn name(&self) -> &str {
        "batch_lexicase"
    }

    fn select_classes(&self, classing: &EquivalenceClassing, n_events: usize, rng: &RandomSource) -> Result<Vec<usize>> {
        Ok(run_events(n_events, self.parallel, rng, |stream| self.event(classing, stream)))
    }
}

/// Mean error of class `c` over the batch cases it is defined on.
fn batch_mean(classing: &EquivalenceClassing, c: usize, batch: &[usize]) -> Option<f64> {
    let (mut sum, mut count) = (0.0, 0usize);
    for &j in batch {
        if classing.support().is_defined(c, j) {
            sum += classing.errors().get(c, j);
            count += 1;
        }
    }
    (count > 0).then(|| sum / count as f64)
}

fn filter_on_batch(classing: &EquivalenceClassing, candidates: &mut Vec<usize>, batch: &[usize], threshold: BatchThreshold) {
    let means: Vec<Option<f64>> = candidates.iter().map(|&c| batch_mean(classing, c, batch)).collect();
    let best = means.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    if best == f64::INFINITY {
        return;
    }
    let slack = match threshold {
        BatchThreshold::Absolute(v) => v,
        BatchThreshold::Mad => {
            let members = classing.members();
            let mut items: Vec<(f64, usize)> = (0..classing.k())
                .filter_map(|c| batch_mean(classing, c, batch).map(|v| (v, members[c].len())))
                .collect();
            weighted_mad(&mut items).unwrap_or(0.0)
        }
    };
    let limit = best + slack;
    let mut i = 0;
    candidates.retain(|_| {
        let keep = means[i].is_some_and(|v| v <= limit);
        i += 1;
        keep
    });
}

/// Survivors of batch filtering along a fixed case order.
pub fn batch_survivors(
    classing: &EquivalenceClassing,
    order: &[usize],
    batch_size: usize,
    threshold: BatchThreshold,
) -> Result<Vec<usize>> {
    if batch_size == 0 {
        return Err(Error::config("batch_size", "must be >= 1"));
    }
    let mut candidates: Vec<usize> = (0..classing.k()).collect();
    for batch in order.chunks(batch_size) {
        if candidates.len() == 1 {
            break;
        }
        filter_on_batch(classing, &mut candidates, batch, threshold);
    }
    Ok(candidates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selectors::lexicase::lexicase_event;

    fn permutations(m: usize) -> Vec<Vec<usize>> {
        if m == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(m - 1) {
            for at in 0..=p.len() {
                let mut q = p.clone();
                q.insert(at, m - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn size_one_zero_threshold_is_lexicase_draw_for_draw() {
        let c = EquivalenceClassing::from_rows(&[[0.0, 1.0, 2.0], [1.0, 0.0, 2.0], [1.0, 1.0, 0.0], [0.0, 2.0, 1.0]]).unwrap();
        let b = BatchLexicase::new(1, BatchThreshold::Absolute(0.0), false).unwrap();
        for i in 0..300 {
            let src = RandomSource::new(i);
            assert_eq!(b.event(&c, &mut src.stream(0)), lexicase_event(&c, None, &mut src.stream(0)));
        }
    }

    #[test]
    fn single_batch_is_mean_argmin() {
        let c = EquivalenceClassing::from_rows(&[[0.0, 4.0], [2.0, 2.0], [1.0, 2.0]]).unwrap();
        let b = BatchLexicase::new(2, BatchThreshold::Absolute(0.0), false).unwrap();
        let sel = b.select_classes(&c, 200, &RandomSource::new(1)).unwrap();
        assert!(sel.iter().all(|&s| s == 2));
        // Oversized batches clamp to m.
        let b = BatchLexicase::new(9, BatchThreshold::Absolute(0.0), false).unwrap();
        assert!(b.select_classes(&c, 50, &RandomSource::new(1)).unwrap().iter().all(|&s| s == 2));
    }

    #[test]
    fn single_batch_ties_are_uniform() {
        let c = EquivalenceClassing::from_rows(&[[0.0, 2.0], [2.0, 0.0], [3.0, 3.0]]).unwrap();
        let b = BatchLexicase::new(2, BatchThreshold::Absolute(0.0), false).unwrap();
        let sel = b.select_classes(&c, 20_000, &RandomSource::new(2)).unwrap();
        let zero = sel.iter().filter(|&&s| s == 0).count() as f64 / 20_000.0;
        assert!(sel.iter().all(|&s| s < 2));
        assert!((zero - 0.5).abs() < 0.015);
    }

    #[test]
    fn enumerated_pairs_example() {
        let c = EquivalenceClassing::from_rows(&[[0.0, 1.0, 1.0, 0.0], [1.0, 0.0, 0.0, 1.0]]).unwrap();
        let t = BatchThreshold::Absolute(0.6);
        // Exact probabilities by enumerating all 24 orders; survivors resolve uniformly.
        let mut p = [0.0; 2];
        let orders = permutations(4);
        for order in &orders {
            let s = batch_survivors(&c, order, 2, t).unwrap();
            for &x in &s {
                p[x] += 1.0 / (s.len() * orders.len()) as f64;
            }
        }
        assert!((p[0] - 0.5).abs() < 1e-12);
        let b = BatchLexicase::new(2, t, false).unwrap();
        let sel = b.select_classes(&c, 40_000, &RandomSource::new(3)).unwrap();
        let zero = sel.iter().filter(|&&s| s == 0).count() as f64 / 40_000.0;
        assert!((zero - 0.5).abs() < 0.01);
    }

    #[test]
    fn mad_threshold_uses_population_batch_means() {
        // batch means over cases {0,1}: 0.0, 1.0, 2.0, 10.0 -> MAD = 1.0 (median 1.5, deviations 1.5,0.5,0.5,8.5)
        let c = EquivalenceClassing::from_rows(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [10.0, 10.0]]).unwrap();
        let s = batch_survivors(&c, &[0, 1], 2, BatchThreshold::Mad).unwrap();
        assert_eq!(s, vec![0, 1]);
    }

    #[test]
    fn zero_batch_size_rejected() {
        assert!(BatchLexicase::new(0, BatchThreshold::Mad, false).is_err());
    }
}
