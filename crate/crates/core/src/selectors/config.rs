use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How batch-lexicase decides how far above the best batch mean a
/// candidate may be and still survive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BatchThreshold {
    /// Median absolute deviation of the population's batch means.
    Mad,
    /// Fixed slack.
    Absolute(f64),
}

/// Flat selector configuration.
///
/// Keys: `method`, `pressure`, `distribution`, `relaxed`, `batch_size`,
/// `batch_threshold_mode` (`mad` | `absolute`), `batch_threshold_value`,
/// `seed`, `parallel`. Method and distribution names are resolved through
/// the registries at build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectorConfig {
    pub method: String,
    /// Standard deviation of the importance scores (DALex only).
    pub pressure: f64,
    pub distribution: String,
    /// Standardize errors per case before weighting (DALex only).
    pub relaxed: bool,
    pub batch_size: usize,
    pub batch_threshold_mode: String,
    pub batch_threshold_value: f64,
    pub seed: u64,
    /// Run iterative selectors across events on the rayon pool. Results do
    /// not depend on this flag.
    pub parallel: bool,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            method: "dalex".into(),
            pressure: 20.0,
            distribution: "normal".into(),
            relaxed: false,
            batch_size: 1,
            batch_threshold_mode: "mad".into(),
            batch_threshold_value: 0.0,
            seed: 0,
            parallel: false,
        }
    }
}

impl SelectorConfig {
    pub fn new(method: impl Into<String>) -> Self {
        Self {
            method: method.into(),
            ..Self::default()
        }
    }

    pub fn dalex(pressure: f64) -> Self {
        Self {
            pressure,
            ..Self::new("dalex")
        }
    }

    pub fn with_distribution(mut self, name: impl Into<String>) -> Self {
        self.distribution = name.into();
        self
    }

    pub fn with_relaxed(mut self, relaxed: bool) -> Self {
        self.relaxed = relaxed;
        self
    }

    pub fn with_batch(mut self, size: usize, threshold: BatchThreshold) -> Self {
        self.batch_size = size;
        match threshold {
            BatchThreshold::Mad => {
                self.batch_threshold_mode = "mad".into();
            }
            BatchThreshold::Absolute(v) => {
                self.batch_threshold_mode = "absolute".into();
                self.batch_threshold_value = v;
            }
        }
        self
    }

    pub fn batch_threshold(&self) -> Result<BatchThreshold> {
        match self.batch_threshold_mode.as_str() {
            "mad" => Ok(BatchThreshold::Mad),
            "absolute" => {
                let v = self.batch_threshold_value;
                if v.is_finite() && v >= 0.0 {
                    Ok(BatchThreshold::Absolute(v))
                } else {
                    Err(Error::config("batch_threshold_value", format!("must be finite and >= 0, got {v}")))
                }
            }
            other => Err(Error::config(
                "batch_threshold_mode",
                format!("unknown mode `{other}` (expected `mad` or `absolute`)"),
            )),
        }
    }

    /// Range checks that do not need the registries.
    pub fn validate(&self) -> Result<()> {
        if !(self.pressure.is_finite() && self.pressure >= 0.0) {
            return Err(Error::config("pressure", format!("must be finite and >= 0, got {}", self.pressure)));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size", "must be >= 1"));
        }
        self.batch_threshold()?;
        Ok(())
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
        }
        match key {
            "method" => self.method = value.to_string(),
            "pressure" => self.pressure = parse(key, value)?,
            "distribution" => self.distribution = value.to_string(),
            "relaxed" => self.relaxed = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "batch_threshold_mode" => self.batch_threshold_mode = value.to_string(),
            "batch_threshold_value" => self.batch_threshold_value = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "parallel" => self.parallel = parse(key, value)?,
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Parses `method[:key=value[,key=value]...]`, e.g.
    /// `dalex:pressure=200,distribution=uniform`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let (method, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let method = method.trim();
        if method.is_empty() {
            return Err(Error::config("method", "empty method name"));
        }
        let mut cfg = Self::new(method);
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::config(pair, "expected key=value"))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    /// Short human-readable label, e.g. `dalex(pressure=200,normal)`.
    pub fn label(&self) -> String {
        match self.method.as_str() {
            "dalex" => format!(
                "dalex(pressure={},{}{})",
                self.pressure,
                self.distribution,
                if self.relaxed { ",relaxed" } else { "" }
            ),
            "batch_lexicase" => format!(
                "batch_lexicase(size={},{})",
                self.batch_size,
                match self.batch_threshold() {
                    Ok(BatchThreshold::Absolute(v)) => format!("absolute={v}"),
                    _ => "mad".to_string(),
                }
            ),
            other => other.to_string(),
        }
    }
}
