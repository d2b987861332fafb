//! Statistical randomness tests in the style of NIST SP 800-22.
//!
//! Eight of the suite's tests are implemented: frequency, block frequency,
//! cumulative sums, runs, longest run of ones, spectral (DFT), approximate
//! entropy and serial. Each returns a [`TestReport`]; [`run_suite`] runs them
//! all in canonical order.

mod frequency;
mod ks;
mod longest_run;
mod patterns;
mod special;
mod spectral;
mod suite;

pub use frequency::{block_frequency_test, cusum_test, frequency_test, runs_test, CusumMode};
pub use ks::{kolmogorov_survival, ks_test, ks_uniform, KsResult};
pub use longest_run::{longest_run_parameters, longest_run_test, LongestRunParameters};
pub use patterns::{approx_entropy_test, pattern_counts, serial_test};
pub use special::{erfc, igam, igamc, ln_gamma, normal_cdf};
pub use spectral::{spectral_test, spectral_test_with, DftMethod};
pub use suite::{run_suite, SuiteConfig, SuiteReport, TestKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Significance level used when a test is judged outside a suite run.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("the bit sequence is empty")]
    EmptyStream,
    #[error("block length {block} does not fit a sequence of {n} bits")]
    InvalidBlockLength { block: usize, n: usize },
    #[error("sequence of {got} bits is shorter than the required {needed}")]
    SequenceTooShort { needed: usize, got: usize },
    #[error("pattern length {0} is out of range")]
    InvalidPatternLength(usize),
    #[error("incomplete gamma undefined for a = {a}, x = {x}")]
    DomainError { a: f64, x: f64 },
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

/// Outcome of one randomness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    #[serde(rename = "name")]
    pub test_name: String,
    pub p_values: Vec<f64>,
    pub statistic: f64,
    pub passed: bool,
    /// False when the sequence does not meet the test's input requirements.
    pub applicable: bool,
}

impl TestReport {
    pub(crate) fn new(name: &str, p_values: Vec<f64>, statistic: f64, applicable: bool) -> Self {
        let p_values: Vec<f64> = p_values
            .into_iter()
            .map(|p| if p.is_nan() { 0.0 } else { p.clamp(0.0, 1.0) })
            .collect();
        let mut report = Self {
            test_name: name.to_string(),
            p_values,
            statistic,
            passed: false,
            applicable,
        };
        report.judge(DEFAULT_ALPHA);
        report
    }

    /// Recompute `passed` at significance `alpha`.
    pub fn judge(&mut self, alpha: f64) {
        self.passed = self.applicable && !self.p_values.is_empty() && self.min_p_value() >= alpha;
    }

    pub fn min_p_value(&self) -> f64 {
        self.p_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn p_value(&self) -> f64 {
        self.p_values[0]
    }
}

/// `bits` as 0/1 bytes; every test works on this view.
pub(crate) fn as_bits(stream: &crate::bitpipe::BitStream) -> Vec<u8> {
    stream.to_bit_vec()
}
