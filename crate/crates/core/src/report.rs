//! Certified values and output formatting.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// A computed value with an error bound and named diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedReport {
    pub quantity: String,
    pub index: i64,
    pub value: Complex64,
    pub error_bound: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl CertifiedReport {
    pub fn new(quantity: &str, index: i64, value: Complex64, error_bound: f64) -> Self {
        Self {
            quantity: quantity.to_string(),
            index,
            value,
            error_bound,
            diagnostics: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.to_string(), v);
        self
    }

    pub fn diag(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }
}
