//! Point estimates with provenance.

use serde::Serialize;
use std::collections::BTreeMap;

/// A point estimate with standard error, sample counts, and the configuration
/// that produced it. Experiment runners may additionally declare a tolerance;
/// `pass` is then derived from `value` and the tolerance, never set by hand.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub name: String,
    pub value: f64,
    pub standard_error: f64,
    pub n_samples: u64,
    /// Effective sample count after autocorrelation; equals `n_samples`
    /// for independent draws.
    pub n_effective: f64,
    pub provenance: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    /// Declared upper bound on `value` for pass/fail experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, value: f64, standard_error: f64, n_samples: u64) -> Self {
        EstimateReport {
            name: name.into(),
            value,
            standard_error,
            n_samples,
            n_effective: n_samples as f64,
            provenance: BTreeMap::new(),
            wall_time_s: None,
            threshold: None,
            pass: None,
        }
    }

    pub fn with_effective(mut self, n_effective: f64) -> Self {
        self.n_effective = n_effective;
        self
    }

    pub fn with_provenance(mut self, key: &str, value: impl ToString) -> Self {
        self.provenance.insert(key.to_string(), value.to_string());
        self
    }

    /// Declare `value <= threshold` as the pass condition.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self.pass = Some(self.value <= threshold);
        self
    }

    pub fn with_wall_time(mut self, seconds: f64) -> Self {
        self.wall_time_s = Some(seconds);
        self
    }
}
