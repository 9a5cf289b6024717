use ndarray::{Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Dense per-case error values. Rows are individuals (or classes), columns
/// are training cases. Every entry is finite and both dimensions are at
/// least one.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix {
    values: Array2<f64>,
}

impl ErrorMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (rows, cols) = values.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!(
                "error matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if let Some(((row, col), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self { values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(n * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {m}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        let values = Array2::from_shape_vec((n, m), flat)
            .map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(values)
    }

    pub fn n_rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    /// Restricts the matrix to the given case columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols()) {
            return Err(Error::Shape(format!(
                "column {bad} out of range for {} columns",
                self.n_cols()
            )));
        }
        Self::new(self.values.select(Axis(1), cols))
    }
}

/// Binary mask of the cases each row is defined on. Shape matches the paired
/// [`ErrorMatrix`]. Stored as 0.0/1.0 so it can enter matrix products directly.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportMatrix {
    mask: Array2<f64>,
    full: bool,
}

impl SupportMatrix {
    /// All-ones support: every individual defined on every case.
    pub fn full(rows: usize, cols: usize) -> Self {
        Self {
            mask: Array2::ones((rows, cols)),
            full: true,
        }
    }

    pub fn new(mask: Array2<f64>) -> Result<Self> {
        for ((row, col), &v) in mask.indexed_iter() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::Support(format!(
                    "entry at row {row}, column {col} is {v}, expected 0 or 1"
                )));
            }
        }
        if let Some(row) = mask
            .outer_iter()
            .position(|r| r.iter().all(|&v| v == 0.0))
        {
            return Err(Error::Support(format!("row {row} has no defined cases")));
        }
        let full = mask.iter().all(|&v| v == 1.0);
        Ok(Self { mask, full })
    }

    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(n * m);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != m {
                return Err(Error::Shape(format!(
                    "support row {i} has {} columns, expected {m}",
                    row.len()
                )));
            }
            flat.extend(row.iter().map(|&b| if b { 1.0 } else { 0.0 }));
        }
        let mask = Array2::from_shape_vec((n, m), flat).map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(mask)
    }

    pub fn n_rows(&self) -> usize {
        self.mask.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.mask.ncols()
    }

    /// True when every entry is one.
    pub fn is_full(&self) -> bool {
        self.full
    }

    #[inline]
    pub fn is_defined(&self, i: usize, j: usize) -> bool {
        self.full || self.mask[[i, j]] == 1.0
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.mask.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.mask.row(i)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_cols()) {
            return Err(Error::Shape(format!(
                "column {bad} out of range for {} columns",
                self.n_cols()
            )));
        }
        Self::new(self.mask.select(Axis(1), cols))
    }

    /// Checks shape agreement and that undefined entries carry error 0.
    pub fn check_pairing(&self, errors: &ErrorMatrix) -> Result<()> {
        if self.mask.dim() != (errors.n_rows(), errors.n_cols()) {
            return Err(Error::Shape(format!(
                "support is {}x{} but errors are {}x{}",
                self.n_rows(),
                self.n_cols(),
                errors.n_rows(),
                errors.n_cols()
            )));
        }
        if !self.full {
            for ((row, col), &s) in self.mask.indexed_iter() {
                if s == 0.0 && errors.get(row, col) != 0.0 {
                    return Err(Error::Support(format!(
                        "undefined entry at row {row}, column {col} has nonzero error {}",
                        errors.get(row, col)
                    )));
                }
            }
        }
        Ok(())
    }
}
