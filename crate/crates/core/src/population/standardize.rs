use ndarray::Array2;

use super::{ErrorMatrix, SupportMatrix};
use crate::error::{Error, Result};

/// Per-case z-scores across the population.
///
/// Row `i` stands for `multiplicities[i]` identical individuals, so the
/// statistics are those of the ungrouped population. Population (not sample)
/// standard deviation. Columns whose values are all equal become all zeros.
pub fn standardize_per_case(errors: &ErrorMatrix, multiplicities: &[f64]) -> Result<ErrorMatrix> {
    standardize_impl(errors, None, multiplicities)
}

/// As [`standardize_per_case`], but statistics use defined entries only and
/// undefined entries stay exactly zero.
pub fn standardize_per_case_masked(
    errors: &ErrorMatrix,
    support: &SupportMatrix,
    multiplicities: &[f64],
) -> Result<ErrorMatrix> {
    support.check_pairing(errors)?;
    if support.is_full() {
        standardize_impl(errors, None, multiplicities)
    } else {
        standardize_impl(errors, Some(support), multiplicities)
    }
}

fn standardize_impl(
    errors: &ErrorMatrix,
    support: Option<&SupportMatrix>,
    weights: &[f64],
) -> Result<ErrorMatrix> {
    let (n, m) = (errors.n_rows(), errors.n_cols());
    if weights.len() != n {
        return Err(Error::Shape(format!(
            "{} multiplicities for {n} rows",
            weights.len()
        )));
    }
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::Shape("multiplicities must be positive".into()));
    }
    let defined = |i: usize, j: usize| support.is_none_or(|s| s.is_defined(i, j));

    let mut out = Array2::zeros((n, m));
    for j in 0..m {
        let col = errors.column(j);
        let mut total = 0.0;
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in (0..n).filter(|&i| defined(i, j)) {
            total += weights[i];
            sum += weights[i] * col[i];
            lo = lo.min(col[i]);
            hi = hi.max(col[i]);
        }
        if total == 0.0 || lo == hi {
            continue;
        }
        let mean = sum / total;
        let var = (0..n)
            .filter(|&i| defined(i, j))
            .map(|i| weights[i] * (col[i] - mean).powi(2))
            .sum::<f64>()
            / total;
        let std = var.sqrt();
        for i in (0..n).filter(|&i| defined(i, j)) {
            out[[i, j]] = (col[i] - mean) / std;
        }
    }
    ErrorMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column(values: &[f64], mult: &[f64]) -> Vec<f64> {
        let rows: Vec<[f64; 1]> = values.iter().map(|&v| [v]).collect();
        let e = ErrorMatrix::from_rows(&rows).unwrap();
        standardize_per_case(&e, mult).unwrap().column(0).to_vec()
    }

    #[test]
    fn two_point_column() {
        // mean 2, population std 1
        assert_eq!(column(&[1.0, 3.0], &[1.0, 1.0]), vec![-1.0, 1.0]);
    }

    #[test]
    fn constant_column_is_zero() {
        assert_eq!(column(&[7.0, 7.0, 7.0], &[1.0, 1.0, 1.0]), vec![0.0; 3]);
        assert_eq!(column(&[0.1, 0.1, 0.1], &[3.0, 1.0, 7.0]), vec![0.0; 3]);
    }

    #[test]
    fn multiplicity_matches_expanded_population() {
        let grouped = column(&[0.0, 4.0], &[3.0, 1.0]);
        let expanded = column(&[0.0, 0.0, 0.0, 4.0], &[1.0; 4]);
        assert!((grouped[0] - expanded[0]).abs() < 1e-12);
        assert!((grouped[1] - expanded[3]).abs() < 1e-12);
    }

    #[test]
    fn idempotent_on_standardized_input() {
        let once = column(&[2.0, 5.0, -1.0, 8.0], &[1.0; 4]);
        let twice = column(&once, &[1.0; 4]);
        for (a, b) in once.iter().zip(&twice) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn masked_keeps_undefined_zero() {
        let e = ErrorMatrix::from_rows(&[[1.0, 0.0], [3.0, 5.0], [5.0, 9.0]]).unwrap();
        let s = SupportMatrix::from_rows(&[[true, false], [true, true], [true, true]]).unwrap();
        let z = standardize_per_case_masked(&e, &s, &[1.0; 3]).unwrap();
        assert_eq!(z.get(0, 1), 0.0);
        assert_eq!(z.get(1, 1), -1.0);
        assert_eq!(z.get(2, 1), 1.0);
    }

    #[test]
    fn bad_multiplicities() {
        let e = ErrorMatrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert!(standardize_per_case(&e, &[1.0]).is_err());
        assert!(standardize_per_case(&e, &[1.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn positive_affine_invariance(
            col in prop::collection::vec(-50.0f64..50.0, 2..12),
            a in 0.01f64..100.0,
            b in -100.0f64..100.0,
        ) {
            let mult = vec![1.0; col.len()];
            let base = column(&col, &mult);
            let moved: Vec<f64> = col.iter().map(|&v| a * v + b).collect();
            let shifted = column(&moved, &mult);
            for (x, y) in base.iter().zip(&shifted) {
                prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }

        #[test]
        fn zero_mean_unit_variance(col in prop::collection::vec(-50.0f64..50.0, 2..12)) {
            let z = column(&col, &vec![1.0; col.len()]);
            let n = z.len() as f64;
            let mean = z.iter().sum::<f64>() / n;
            let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            prop_assert!(var == 0.0 || (var - 1.0).abs() < 1e-9);
        }
    }
}
