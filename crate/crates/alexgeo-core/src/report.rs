//! Verification reports shared by the checkers.

use alloc::string::String;
use alloc::vec::Vec;

/// Outcome of a sampled verification.
///
/// `worst_margin` is the smallest observed slack of the checked inequality;
/// a check passes when it is at least `-tolerance`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Report {
    pub check: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(check: impl Into<String>, tolerance: f64) -> Self {
        Report {
            check: check.into(),
            passed: true,
            worst_margin: f64::INFINITY,
            tolerance,
            samples: 0,
            metrics: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records one sample's slack.
    pub fn margin(&mut self, m: f64) {
        self.samples += 1;
        if m < self.worst_margin || m.is_nan() {
            self.worst_margin = m;
        }
        if !(m >= -self.tolerance) {
            self.passed = false;
        }
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn fail(&mut self, text: impl Into<String>) {
        self.passed = false;
        self.notes.push(text.into());
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|m| m.0 == name).map(|m| m.1)
    }

    /// Folds another report's samples into this one.
    pub fn absorb(&mut self, other: &Report) {
        self.samples += other.samples;
        if other.worst_margin < self.worst_margin {
            self.worst_margin = other.worst_margin;
        }
        self.passed &= other.passed;
        self.notes.extend(other.notes.iter().cloned());
    }
}
