//! Population-level data: error and support matrices, equivalence classes,
//! per-case standardization, and seeded random streams.

mod classing;
mod io;
mod matrix;
mod random;
mod standardize;

pub use classing::{build_classes, expand_class_selection, EquivalenceClassing};
pub use io::{parse_error_csv, parse_support_csv, read_error_csv, read_support_csv};
pub use matrix::{ErrorMatrix, SupportMatrix};
pub use random::RandomSource;
pub use standardize::{standardize_per_case, standardize_per_case_masked};
