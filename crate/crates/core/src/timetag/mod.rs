//! Time-domain Monte Carlo of the detection chain.
//!
//! Pairs are emitted as a homogeneous Poisson process. Each pair draws a
//! click pattern from the closed-form optics model, every click gets Gaussian
//! timing jitter, dark counts are merged per detector and a non-paralyzable
//! dead time is applied. The resulting time-sorted click stream feeds the
//! coincidence circuit.

mod coincidence;
mod fit;
mod scan;
mod stream;

pub use coincidence::{
    coincidence_filter, coincidence_pairs, purity_monitor, CoincidenceFilter, CoincidenceStats,
    MonitorReport, MonitorVerdict, TaggedCoincidence,
};
pub use fit::{fit_gaussian_feature, GaussianFit};
pub use scan::{scan_delay, ScanPoint};
pub use stream::{derive_seed, EventStream, JITTER_TRUNCATION_SIGMAS};

use crate::optics::{Detector, OpticsError};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const PS_PER_SECOND: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimetagError {
    #[error("duration must be positive and finite, got {0} s")]
    InvalidDuration(f64),
    #[error("rate must be non-negative and finite, got {0} Hz")]
    InvalidRate(f64),
    #[error("invalid timing configuration: {0}")]
    InvalidTiming(String),
    #[error("events are not time-sorted at index {0}")]
    UnsortedInput(usize),
    #[error("a delay scan needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// Pair emission parameters for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceConfig {
    pub pair_rate_hz: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl SourceConfig {
    pub fn new(pair_rate_hz: f64, duration_s: f64, seed: u64) -> Result<Self, TimetagError> {
        let cfg = Self {
            pair_rate_hz,
            duration_s,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TimetagError> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(TimetagError::InvalidDuration(self.duration_s));
        }
        // i64 picoseconds overflow at ~9.2e6 s.
        if self.duration_s * PS_PER_SECOND >= i64::MAX as f64 / 2.0 {
            return Err(TimetagError::InvalidDuration(self.duration_s));
        }
        if !(self.pair_rate_hz.is_finite() && self.pair_rate_hz >= 0.0) {
            return Err(TimetagError::InvalidRate(self.pair_rate_hz));
        }
        Ok(())
    }

    pub fn duration_ps(&self) -> i64 {
        (self.duration_s * PS_PER_SECOND).round() as i64
    }
}

/// Detector timing and coincidence circuit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    /// Per-click Gaussian jitter, picoseconds (typical SPAD value).
    pub jitter_sigma_ps: f64,
    /// Non-paralyzable dead time per detector, nanoseconds.
    pub dead_time_ns: f64,
    pub coincidence_window_ns: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            jitter_sigma_ps: 300.0,
            dead_time_ns: 50.0,
            coincidence_window_ns: 3.0,
        }
    }
}

impl TimingConfig {
    pub fn new(
        jitter_sigma_ps: f64,
        dead_time_ns: f64,
        coincidence_window_ns: f64,
    ) -> Result<Self, TimetagError> {
        let cfg = Self {
            jitter_sigma_ps,
            dead_time_ns,
            coincidence_window_ns,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TimetagError> {
        if !(self.jitter_sigma_ps.is_finite() && self.jitter_sigma_ps >= 0.0) {
            return Err(TimetagError::InvalidTiming(format!(
                "jitter must be non-negative, got {} ps",
                self.jitter_sigma_ps
            )));
        }
        if !(self.dead_time_ns.is_finite() && self.dead_time_ns >= 0.0) {
            return Err(TimetagError::InvalidTiming(format!(
                "dead time must be non-negative, got {} ns",
                self.dead_time_ns
            )));
        }
        if !(self.coincidence_window_ns.is_finite() && self.coincidence_window_ns > 0.0) {
            return Err(TimetagError::InvalidTiming(format!(
                "coincidence window must be positive, got {} ns",
                self.coincidence_window_ns
            )));
        }
        Ok(())
    }

    pub fn window_ps(&self) -> i64 {
        (self.coincidence_window_ns * 1e3).round() as i64
    }

    pub fn dead_time_ps(&self) -> i64 {
        (self.dead_time_ns * 1e3).round() as i64
    }
}

/// One detector click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub detector: Detector,
    /// Picoseconds from run start.
    pub time_ps: i64,
}

impl DetectionEvent {
    pub fn new(detector: Detector, time_ps: i64) -> Self {
        Self { detector, time_ps }
    }
}

/// Unordered detector pair of a coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairLabel {
    D1D2,
    D3D4,
    D1D3,
    D1D4,
    D2D3,
    D2D4,
}

impl PairLabel {
    pub const ALL: [PairLabel; 6] = [
        PairLabel::D1D2,
        PairLabel::D3D4,
        PairLabel::D1D3,
        PairLabel::D1D4,
        PairLabel::D2D3,
        PairLabel::D2D4,
    ];

    /// `None` when both clicks are on the same detector.
    pub fn of(a: Detector, b: Detector) -> Option<Self> {
        use Detector::*;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        match (lo, hi) {
            (D1, D2) => Some(PairLabel::D1D2),
            (D3, D4) => Some(PairLabel::D3D4),
            (D1, D3) => Some(PairLabel::D1D3),
            (D1, D4) => Some(PairLabel::D1D4),
            (D2, D3) => Some(PairLabel::D2D3),
            (D2, D4) => Some(PairLabel::D2D4),
            _ => None,
        }
    }

    /// One click on each output arm of the first splitter.
    pub fn is_cross_arm(self) -> bool {
        !matches!(self, PairLabel::D1D2 | PairLabel::D3D4)
    }

    pub fn name(self) -> &'static str {
        match self {
            PairLabel::D1D2 => "D1D2",
            PairLabel::D3D4 => "D3D4",
            PairLabel::D1D3 => "D1D3",
            PairLabel::D1D4 => "D1D4",
            PairLabel::D2D3 => "D2D3",
            PairLabel::D2D4 => "D2D4",
        }
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Two clicks on different detectors within the coincidence window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoincidenceEvent {
    pub pair: PairLabel,
    /// Timestamp of the earlier click.
    pub time_ps: i64,
}

/// A counted rate with its Poisson uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub counts: u64,
    pub duration_s: f64,
}

impl RateEstimate {
    pub fn new(counts: u64, duration_s: f64) -> Self {
        Self { counts, duration_s }
    }

    pub fn rate_hz(&self) -> f64 {
        self.counts as f64 / self.duration_s
    }

    pub fn sigma_hz(&self) -> f64 {
        (self.counts as f64).sqrt() / self.duration_s
    }
}

/// Run the full click-level simulation and collect the time-sorted stream.
pub fn simulate(
    source: &SourceConfig,
    interf: &crate::optics::InterferometerConfig,
    bank: &crate::optics::DetectorBank,
    timing: &TimingConfig,
) -> Result<Vec<DetectionEvent>, TimetagError> {
    Ok(EventStream::new(source, interf, bank, timing)?.collect())
}
