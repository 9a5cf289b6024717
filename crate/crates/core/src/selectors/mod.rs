//! Parent-selection operators.
//!
//! Every operator implements [`Selector`] and is constructed by name through
//! a [`SelectorRegistry`], so the method can be chosen from a config file or
//! the command line:
//!
//! ```
//! use dalex::{EquivalenceClassing, RandomSource, SelectorConfig, SelectorRegistry};
//!
//! let classes = EquivalenceClassing::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
//! let selector = SelectorRegistry::with_builtins()
//!     .build(&SelectorConfig::from_spec("dalex:pressure=200").unwrap())
//!     .unwrap();
//! let parents = selector.select_individuals(&classes, 4, &RandomSource::new(1)).unwrap();
//! assert_eq!(parents.len(), 4);
//! ```

mod batch;
mod config;
mod dalex;
mod importance;
mod lexicase;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use batch::{batch_survivors, BatchLexicase};
pub use config::{BatchThreshold, SelectorConfig};
pub use dalex::{dalex_fitness, support_denominators, Dalex};
pub use importance::{
    lexicase_exact_spacing, sample_importance, softmax_rows, DistributionRegistry, ImportanceDistribution,
    ImportanceMatrix, Normal, ShuffledRange, Uniform, WeightMatrix,
};
pub use lexicase::{epsilon_for_cases, lexicase_survivors, EpsilonLexicase, Lexicase};

use crate::error::{Error, Result};
use crate::population::{expand_class_selection, EquivalenceClassing, RandomSource};

/// A parent-selection operator working on equivalence classes.
///
/// One call is one batched selection event: `n_events` independent
/// selections. Implementations must be pure functions of their inputs and
/// `rng`; event `i` draws from stream `i` of whatever child source it uses.
pub trait Selector: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Selects `n_events` class indices.
    fn select_classes(&self, classing: &EquivalenceClassing, n_events: usize, rng: &RandomSource) -> Result<Vec<usize>>;

    /// Selects classes, then a uniformly random member of each.
    fn select_individuals(
        &self,
        classing: &EquivalenceClassing,
        n_events: usize,
        rng: &RandomSource,
    ) -> Result<Vec<usize>> {
        let classes = self.select_classes(classing, n_events, &rng.derive("classes"))?;
        expand_class_selection(classing, &classes, &rng.derive("expand"))
    }
}

type Factory = Arc<dyn Fn(&SelectorConfig, &DistributionRegistry) -> Result<Box<dyn Selector>> + Send + Sync>;

struct Entry {
    description: &'static str,
    factory: Factory,
}

/// Selection methods by name.
pub struct SelectorRegistry {
    methods: BTreeMap<String, Entry>,
    distributions: DistributionRegistry,
}

impl fmt::Debug for SelectorRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelectorRegistry")
            .field("methods", &self.methods.keys().collect::<Vec<_>>())
            .field("distributions", &self.distributions)
            .finish()
    }
}

impl Default for SelectorRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

impl SelectorRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
            distributions: DistributionRegistry::with_builtins(),
        }
    }

    /// `dalex`, `lexicase`, `epsilon_lexicase`, `batch_lexicase`.
    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register("dalex", "diversely aggregated lexicase (batched softmax-weighted argmin)", |cfg, dists| {
            Ok(Box::new(Dalex::new(cfg.pressure, dists.get(&cfg.distribution)?, cfg.relaxed)?))
        });
        r.register("lexicase", "iterative lexicase selection", |cfg, _| {
            Ok(Box::new(Lexicase { parallel: cfg.parallel }))
        });
        r.register("epsilon_lexicase", "semi-dynamic epsilon-lexicase with MAD epsilons", |cfg, _| {
            Ok(Box::new(EpsilonLexicase { parallel: cfg.parallel }))
        });
        r.register("batch_lexicase", "lexicase over batches of cases by mean error", |cfg, _| {
            Ok(Box::new(BatchLexicase::new(cfg.batch_size, cfg.batch_threshold()?, cfg.parallel)?))
        });
        r
    }

    pub fn register<F>(&mut self, name: &str, description: &'static str, factory: F)
    where
        F: Fn(&SelectorConfig, &DistributionRegistry) -> Result<Box<dyn Selector>> + Send + Sync + 'static,
    {
        self.methods.insert(
            name.to_string(),
            Entry {
                description,
                factory: Arc::new(factory),
            },
        );
    }

    pub fn distributions(&self) -> &DistributionRegistry {
        &self.distributions
    }

    pub fn distributions_mut(&mut self) -> &mut DistributionRegistry {
        &mut self.distributions
    }

    pub fn contains(&self, name: &str) -> bool {
        self.methods.contains_key(name)
    }

    /// (name, description) of every registered method.
    pub fn list(&self) -> Vec<(&str, &'static str)> {
        self.methods.iter().map(|(k, e)| (k.as_str(), e.description)).collect()
    }

    pub fn build(&self, cfg: &SelectorConfig) -> Result<Box<dyn Selector>> {
        cfg.validate()?;
        let entry = self.methods.get(&cfg.method).ok_or_else(|| {
            Error::config(
                "method",
                format!(
                    "unknown method `{}` (known: {})",
                    cfg.method,
                    self.methods.keys().cloned().collect::<Vec<_>>().join(", ")
                ),
            )
        })?;
        (entry.factory)(cfg, &self.distributions)
    }
}
