//! Lexicase-family parent selection.
//!
//! The crate is organised around a population's per-case error matrix:
//!
//! - [`population`] holds the matrix types, equivalence-class grouping,
//!   per-case standardization and the seeded random-stream contract.
//! - [`selectors`] implements DALex and the iterative lexicase baselines
//!   behind the [`selectors::Selector`] trait, registered by name.
//! - [`oracle`] computes exact lexicase selection probabilities on small
//!   instances and empirical distributions for any selector.
//! - [`metrics`] compares distributions (Jensen-Shannon divergence,
//!   lineage probability ratio, bootstrap summaries).
//! - [`evolve`] is a small generational harness over synthetic problems.
//! - [`bench`] times batched selection events.

pub mod bench;
pub mod error;
pub mod evolve;
pub mod metrics;
pub mod oracle;
pub mod population;
pub mod selectors;
mod stats;

pub use error::{Error, Result};
pub use population::{EquivalenceClassing, ErrorMatrix, RandomSource, SupportMatrix};
pub use selectors::{Selector, SelectorConfig, SelectorRegistry};
