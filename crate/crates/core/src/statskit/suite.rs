use super::{
    approx_entropy_test, block_frequency_test, cusum_test, frequency_test, longest_run_test, runs_test,
    serial_test, spectral_test, CusumMode, StatsError, TestReport, DEFAULT_ALPHA,
};
use crate::bitpipe::BitStream;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// The suite's tests in canonical report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestKind {
    Frequency,
    BlockFrequency,
    CusumForward,
    CusumBackward,
    Runs,
    LongestRun,
    Fft,
    ApproximateEntropy,
    Serial,
}

impl TestKind {
    pub const ALL: [TestKind; 9] = [
        TestKind::Frequency,
        TestKind::BlockFrequency,
        TestKind::CusumForward,
        TestKind::CusumBackward,
        TestKind::Runs,
        TestKind::LongestRun,
        TestKind::Fft,
        TestKind::ApproximateEntropy,
        TestKind::Serial,
    ];

    /// Report name, identical to the `name` field of the test's report.
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Frequency => "Frequency",
            TestKind::BlockFrequency => "BlockFrequency",
            TestKind::CusumForward => "CumulativeSums-forward",
            TestKind::CusumBackward => "CumulativeSums-backward",
            TestKind::Runs => "Runs",
            TestKind::LongestRun => "LongestRun",
            TestKind::Fft => "FFT",
            TestKind::ApproximateEntropy => "ApproximateEntropy",
            TestKind::Serial => "Serial",
        }
    }

    /// Label for human-readable tables.
    pub fn display_name(self) -> &'static str {
        match self {
            TestKind::Frequency => "Frequency",
            TestKind::BlockFrequency => "Block Frequency",
            TestKind::CusumForward => "Cumulative-sums (forward)",
            TestKind::CusumBackward => "Cumulative-sums (backward)",
            TestKind::Runs => "Runs",
            TestKind::LongestRun => "Longest Run",
            TestKind::Fft => "FFT",
            TestKind::ApproximateEntropy => "Approx. Entropy",
            TestKind::Serial => "Serial",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

pub const DEFAULT_BLOCK_FREQUENCY_M: usize = 128;
pub const DEFAULT_APPROX_ENTROPY_M: usize = 2;
pub const MAX_SERIAL_M: usize = 16;

/// Significance level and per-test block/pattern lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuiteConfig {
    alpha: f64,
    block_frequency_m: usize,
    approx_entropy_m: usize,
    /// `None` picks `min(16, ⌊log₂ n⌋ − 3)`, at least 2.
    serial_m: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            block_frequency_m: DEFAULT_BLOCK_FREQUENCY_M,
            approx_entropy_m: DEFAULT_APPROX_ENTROPY_M,
            serial_m: None,
        }
    }
}

impl SuiteConfig {
    pub fn new(alpha: f64) -> Result<Self, StatsError> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(StatsError::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha,
            ..Self::default()
        })
    }

    pub fn with_block_frequency_m(mut self, m: usize) -> Self {
        self.block_frequency_m = m;
        self
    }

    pub fn with_approx_entropy_m(mut self, m: usize) -> Self {
        self.approx_entropy_m = m;
        self
    }

    pub fn with_serial_m(mut self, m: Option<usize>) -> Self {
        self.serial_m = m;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn block_frequency_m(&self) -> usize {
        self.block_frequency_m
    }

    pub fn approx_entropy_m(&self) -> usize {
        self.approx_entropy_m
    }

    /// Serial pattern length used for a sequence of `n` bits.
    pub fn serial_m_for(&self, n: usize) -> usize {
        self.serial_m.unwrap_or_else(|| {
            let log2 = if n == 0 { 0 } else { n.ilog2() as usize };
            log2.saturating_sub(3).clamp(2, MAX_SERIAL_M)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub sequence_id: String,
    pub n_bits: usize,
    pub alpha: f64,
    pub tests: Vec<TestReport>,
    /// Every applicable test passed, and at least one was applicable.
    pub overall_pass: bool,
}

impl SuiteReport {
    pub fn with_sequence_id(mut self, id: impl Into<String>) -> Self {
        self.sequence_id = id.into();
        self
    }

    pub fn get(&self, kind: TestKind) -> Option<&TestReport> {
        self.tests.iter().find(|t| t.test_name == kind.name())
    }
}

fn run_one(kind: TestKind, bits: &BitStream, config: &SuiteConfig) -> TestReport {
    let result = match kind {
        TestKind::Frequency => frequency_test(bits),
        TestKind::BlockFrequency => block_frequency_test(bits, config.block_frequency_m),
        TestKind::CusumForward => cusum_test(bits, CusumMode::Forward),
        TestKind::CusumBackward => cusum_test(bits, CusumMode::Backward),
        TestKind::Runs => runs_test(bits),
        TestKind::LongestRun => longest_run_test(bits),
        TestKind::Fft => spectral_test(bits),
        TestKind::ApproximateEntropy => approx_entropy_test(bits, config.approx_entropy_m),
        TestKind::Serial => serial_test(bits, config.serial_m_for(bits.len())),
    };
    let mut report = result.unwrap_or_else(|_| TestReport {
        test_name: kind.name().to_string(),
        p_values: Vec::new(),
        statistic: 0.0,
        passed: false,
        applicable: false,
    });
    report.judge(config.alpha);
    report
}

/// Run every test on `bits`, concurrently, reporting in canonical order.
pub fn run_suite(bits: &BitStream, config: &SuiteConfig) -> SuiteReport {
    let tests: Vec<TestReport> = TestKind::ALL
        .par_iter()
        .map(|&kind| run_one(kind, bits, config))
        .collect();
    let overall_pass = tests.iter().any(|t| t.applicable) && tests.iter().filter(|t| t.applicable).all(|t| t.passed);
    SuiteReport {
        sequence_id: String::new(),
        n_bits: bits.len(),
        alpha: config.alpha,
        tests,
        overall_pass,
    }
}
