use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// Uniform mutation by addition and deletion.
///
/// Each position first gains a random token in front of it with probability
/// `rate`; then each position of the grown genome is deleted with
/// probability `rate / (1 + rate)`, which keeps the expected length
/// unchanged.
pub fn umad_mutate<R: Rng + ?Sized>(genome: &[u32], rate: f64, n_tokens: u32, rng: &mut R) -> Vec<u32> {
    debug_assert!((0.0..1.0).contains(&rate));
    if rate == 0.0 || genome.is_empty() {
        return genome.to_vec();
    }
    let mut grown = Vec::with_capacity(genome.len() + genome.len() / 4 + 1);
    for &g in genome {
        if rng.random::<f64>() < rate {
            grown.push(rng.random_range(0..n_tokens));
        }
        grown.push(g);
    }
    let delete = rate / (1.0 + rate);
    grown.retain(|_| rng.random::<f64>() >= delete);
    grown
}

/// Uniformly random subset of `max(1, round(rate·m))` case indices, sorted.
pub fn downsample_cases<R: Rng + ?Sized>(m: usize, rate: f64, rng: &mut R) -> Result<Vec<usize>> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::config("downsample_rate", format!("must be in (0, 1], got {rate}")));
    }
    if m == 0 {
        return Err(Error::Empty("cases"));
    }
    let size = ((rate * m as f64).round() as usize).clamp(1, m);
    if size == m {
        return Ok((0..m).collect());
    }
    let mut picked = index::sample(rng, m, size).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::RandomSource;

    #[test]
    fn zero_rate_is_identity() {
        let g = vec![1, 2, 3];
        assert_eq!(umad_mutate(&g, 0.0, 10, &mut RandomSource::new(0).stream(0)), g);
    }

    #[test]
    fn empty_stays_empty() {
        assert!(umad_mutate(&[], 0.5, 10, &mut RandomSource::new(0).stream(0)).is_empty());
    }

    #[test]
    fn length_neutral_in_expectation() {
        let g = vec![0u32; 100_000];
        let mut total = 0i64;
        let trials = 20;
        for t in 0..trials {
            let out = umad_mutate(&g, 0.09, 5, &mut RandomSource::new(1).stream(t));
            total += out.len() as i64 - g.len() as i64;
        }
        let mean_change = total as f64 / trials as f64;
        assert!(mean_change.abs() < 0.01 * g.len() as f64, "{mean_change}");
    }

    #[test]
    fn tokens_stay_in_alphabet() {
        let g = vec![3u32; 1000];
        let out = umad_mutate(&g, 0.5, 4, &mut RandomSource::new(2).stream(0));
        assert!(out.iter().all(|&t| t < 4));
        assert!(out.iter().any(|&t| t != 3));
    }

    #[test]
    fn downsample_sizes() {
        let mut rng = RandomSource::new(3).stream(0);
        assert_eq!(downsample_cases(10, 1.0, &mut rng).unwrap(), (0..10).collect::<Vec<_>>());
        let s = downsample_cases(100, 0.25, &mut rng).unwrap();
        assert_eq!(s.len(), 25);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(downsample_cases(3, 0.01, &mut rng).unwrap().len(), 1);
        assert!(downsample_cases(10, 0.0, &mut rng).is_err());
        assert!(downsample_cases(10, 1.5, &mut rng).is_err());
    }

    #[test]
    fn downsample_is_uniform_across_streams() {
        // Chi-square over per-case inclusion counts, 20 cases, 4 per draw.
        let src = RandomSource::new(4);
        let draws = 5000;
        let mut counts = [0f64; 20];
        let first = downsample_cases(20, 0.2, &mut src.stream(0)).unwrap();
        let mut identical = 0;
        for d in 0..draws {
            let s = downsample_cases(20, 0.2, &mut src.stream(d)).unwrap();
            if d > 0 && s == first {
                identical += 1;
            }
            for c in s {
                counts[c] += 1.0;
            }
        }
        let expected = draws as f64 * 4.0 / 20.0;
        let chi2: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
        // 19 degrees of freedom; 43.8 is the 0.999 quantile.
        assert!(chi2 < 43.8, "{chi2}");
        assert!(identical < 10);
    }
}
