//! Structured outcomes of the individual checks.

use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// The rewriter reduced the expression to exactly zero.
    ProvedZero,
    /// A non-zero canonical form was produced; it is not a proof of non-vanishing.
    Residual,
    Passed,
    Failed,
    /// Every sampled evaluation stayed below the tolerance.
    NumericallyZero,
    /// Some evaluation exceeded the tolerance.
    NonzeroWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub sample: usize,
    /// Largest absolute component at this sample.
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    #[serde(rename = "name")]
    pub check: String,
    pub mode: String,
    pub status: Status,
    /// Whether the status is the one the check expects.
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub residual_form: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub witnesses: Vec<Witness>,
    /// Per-sample maximum absolute component, numeric checks only.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub max_residuals: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    pub runtime_ms: f64,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>, mode: impl Into<String>, status: Status, passed: bool) -> Self {
        VerificationReport {
            check: check.into(),
            mode: mode.into(),
            status,
            passed,
            value: None,
            residual_form: None,
            witnesses: Vec::new(),
            max_residuals: Vec::new(),
            notes: Vec::new(),
            runtime_ms: 0.0,
        }
    }

    pub fn value(mut self, v: impl Into<String>) -> Self {
        self.value = Some(v.into());
        self
    }

    pub fn residual(mut self, r: impl Into<String>) -> Self {
        self.residual_form = Some(r.into());
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }
}
