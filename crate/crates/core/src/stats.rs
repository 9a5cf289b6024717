//! Small order statistics shared by the selectors and metrics.

/// Median of a multiset given as (value, count) pairs. Even totals take the
/// mean of the two middle values. Returns `None` for an empty multiset.
pub(crate) fn weighted_median(items: &mut [(f64, usize)]) -> Option<f64> {
    let total: usize = items.iter().map(|&(_, c)| c).sum();
    if total == 0 {
        return None;
    }
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo_rank = (total - 1) / 2;
    let hi_rank = total / 2;
    let mut lo = None;
    let mut seen = 0;
    for &(v, c) in items.iter() {
        seen += c;
        if lo.is_none() && seen > lo_rank {
            lo = Some(v);
        }
        if seen > hi_rank {
            return Some((lo.unwrap_or(v) + v) / 2.0);
        }
    }
    unreachable!("ranks lie below the total count")
}

/// Median absolute deviation from the median, over a weighted multiset.
pub(crate) fn weighted_mad(items: &mut [(f64, usize)]) -> Option<f64> {
    let med = weighted_median(items)?;
    let mut dev: Vec<(f64, usize)> = items.iter().map(|&(v, c)| ((v - med).abs(), c)).collect();
    weighted_median(&mut dev)
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(values: &[f64]) -> Vec<(f64, usize)> {
        values.iter().map(|&v| (v, 1)).collect()
    }

    /// Reference median on an explicit list, written independently.
    fn plain_median(values: &[f64]) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    }

    #[test]
    fn odd_and_even() {
        assert_eq!(weighted_median(&mut unit(&[3.0, 1.0, 2.0])), Some(2.0));
        assert_eq!(weighted_median(&mut unit(&[0.0, 10.0])), Some(5.0));
        assert_eq!(weighted_median(&mut []), None);
    }

    #[test]
    fn counts_expand() {
        let mut w = vec![(1.0, 3), (9.0, 1)];
        assert_eq!(weighted_median(&mut w), Some(plain_median(&[1.0, 1.0, 1.0, 9.0])));
        let mut w = vec![(1.0, 2), (9.0, 2)];
        assert_eq!(weighted_median(&mut w), Some(5.0));
    }

    #[test]
    fn mad_examples() {
        let col = [1.0, 2.0, 3.0, 4.0, 100.0];
        let med = plain_median(&col);
        let dev: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
        assert_eq!(med, 3.0);
        assert_eq!(weighted_mad(&mut unit(&col)), Some(plain_median(&dev)));
        assert_eq!(weighted_mad(&mut unit(&col)), Some(1.0));
        assert_eq!(weighted_mad(&mut unit(&[0.0, 10.0])), Some(5.0));
        assert_eq!(weighted_mad(&mut unit(&[4.0, 4.0, 4.0])), Some(0.0));
    }

    #[test]
    fn quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }
}
