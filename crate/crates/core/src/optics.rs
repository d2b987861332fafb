//! Closed-form probability model of the two-photon interferometer.
//!
//! Two photons enter the first 50/50 splitter through different ports,
//! `|1⟩₁ ⊗ |1⟩₂`. Their distinguishability is set by the relative delay and
//! a visibility ceiling; the output is a mixture of the bunched states
//! `|2,0⟩`, `|0,2⟩` and the split state `|1,1⟩`. Each output arm then feeds a
//! secondary splitter with two detectors (D1, D2 on arm 3; D3, D4 on arm 4),
//! which acts as a two-photon number resolving detector.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Speed of light in vacuum, m/s.
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Centre wavelength of the down-converted photons, metres.
pub const DEFAULT_WAVELENGTH_M: f64 = 816e-9;
/// Interference filter bandwidth (FWHM), metres.
pub const DEFAULT_FILTER_BANDWIDTH_M: f64 = 10e-9;

/// Transform-limited coherence time `λ²/(c·Δλ)` in femtoseconds.
pub fn coherence_time_from_filter(wavelength_m: f64, bandwidth_m: f64) -> f64 {
    wavelength_m * wavelength_m / (SPEED_OF_LIGHT * bandwidth_m) * 1e15
}

/// Default coherence time (≈ 222 fs) for 816 nm photons behind 10 nm filters.
pub fn default_coherence_time_fs() -> f64 {
    coherence_time_from_filter(DEFAULT_WAVELENGTH_M, DEFAULT_FILTER_BANDWIDTH_M)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("coherence time must be positive and finite, got {0} fs")]
    InvalidCoherenceTime(f64),
    #[error("delay must be finite, got {0} fs")]
    InvalidDelay(f64),
    #[error("reflectivity must lie in [0, 1], got {0}")]
    InvalidReflectivity(f64),
    #[error("visibility ceiling must lie in [0, 1], got {0}")]
    InvalidVisibilityCeiling(f64),
    #[error("detector efficiency must lie in [0, 1], got {0}")]
    InvalidEfficiency(f64),
    #[error("dark count rate must be non-negative and finite, got {0} Hz")]
    InvalidDarkRate(f64),
    #[error("only a balanced first splitter is modelled, got reflectivity {0}")]
    UnsupportedReflectivity(f64),
}

fn unit_interval(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

/// Geometry and quality of the first splitter interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferometerConfig {
    delay_fs: f64,
    coherence_time_fs: f64,
    reflectivity: f64,
    visibility_ceiling: f64,
}

impl InterferometerConfig {
    pub fn new(
        delay_fs: f64,
        coherence_time_fs: f64,
        reflectivity: f64,
        visibility_ceiling: f64,
    ) -> Result<Self, OpticsError> {
        if !delay_fs.is_finite() {
            return Err(OpticsError::InvalidDelay(delay_fs));
        }
        if !(coherence_time_fs.is_finite() && coherence_time_fs > 0.0) {
            return Err(OpticsError::InvalidCoherenceTime(coherence_time_fs));
        }
        if !unit_interval(reflectivity) {
            return Err(OpticsError::InvalidReflectivity(reflectivity));
        }
        if !unit_interval(visibility_ceiling) {
            return Err(OpticsError::InvalidVisibilityCeiling(visibility_ceiling));
        }
        Ok(Self {
            delay_fs,
            coherence_time_fs,
            reflectivity,
            visibility_ceiling,
        })
    }

    /// Balanced splitter, perfect mode overlap, default coherence time.
    pub fn ideal(delay_fs: f64) -> Result<Self, OpticsError> {
        Self::new(delay_fs, default_coherence_time_fs(), 0.5, 1.0)
    }

    pub fn delay_fs(&self) -> f64 {
        self.delay_fs
    }

    pub fn coherence_time_fs(&self) -> f64 {
        self.coherence_time_fs
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    pub fn visibility_ceiling(&self) -> f64 {
        self.visibility_ceiling
    }

    /// Same interferometer at another delay.
    pub fn with_delay(&self, delay_fs: f64) -> Result<Self, OpticsError> {
        Self::new(
            delay_fs,
            self.coherence_time_fs,
            self.reflectivity,
            self.visibility_ceiling,
        )
    }
}

impl Default for InterferometerConfig {
    fn default() -> Self {
        Self::ideal(0.0).expect("default interferometer is valid")
    }
}

/// Two-photon interference visibility `V₀·exp(−(τ/τc)²)`.
pub fn visibility(config: &InterferometerConfig) -> f64 {
    let x = config.delay_fs / config.coherence_time_fs;
    config.visibility_ceiling * (-x * x).exp()
}

/// Photon-number distribution over the two output arms of the first splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputDistribution {
    /// Both photons in arm 3.
    pub p20: f64,
    /// Both photons in arm 4.
    pub p02: f64,
    /// One photon per arm.
    pub p11: f64,
}

impl OutputDistribution {
    pub fn total(&self) -> f64 {
        self.p20 + self.p02 + self.p11
    }
}

pub fn output_distribution(
    config: &InterferometerConfig,
) -> Result<OutputDistribution, OpticsError> {
    if config.reflectivity != 0.5 {
        return Err(OpticsError::UnsupportedReflectivity(config.reflectivity));
    }
    let v = visibility(config);
    let p11 = (1.0 - v) / 2.0;
    let bunched = (1.0 + v) / 4.0;
    Ok(OutputDistribution {
        p20: bunched,
        p02: bunched,
        p11,
    })
}

/// The four single-photon counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
    D3,
    D4,
}

impl Detector {
    pub const ALL: [Detector; 4] = [Detector::D1, Detector::D2, Detector::D3, Detector::D4];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    /// Output arm of the first splitter this detector sits on (3 or 4).
    pub fn arm(self) -> u8 {
        match self {
            Detector::D1 | Detector::D2 => 3,
            Detector::D3 | Detector::D4 => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
            Detector::D3 => "D3",
            Detector::D4 => "D4",
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Detector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "D1" => Ok(Detector::D1),
            "D2" => Ok(Detector::D2),
            "D3" => Ok(Detector::D3),
            "D4" => Ok(Detector::D4),
            other => Err(format!("unknown detector {other:?}")),
        }
    }
}

/// Detector parameters shared by the four counters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorBank {
    efficiency: f64,
    dark_rate_hz: f64,
}

impl DetectorBank {
    pub fn new(efficiency: f64, dark_rate_hz: f64) -> Result<Self, OpticsError> {
        if !unit_interval(efficiency) {
            return Err(OpticsError::InvalidEfficiency(efficiency));
        }
        if !(dark_rate_hz.is_finite() && dark_rate_hz >= 0.0) {
            return Err(OpticsError::InvalidDarkRate(dark_rate_hz));
        }
        Ok(Self {
            efficiency,
            dark_rate_hz,
        })
    }

    /// Unit efficiency, no dark counts.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            dark_rate_hz: 0.0,
        }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn dark_rate_hz(&self) -> f64 {
        self.dark_rate_hz
    }

    pub fn labels(&self) -> [Detector; 4] {
        Detector::ALL
    }
}

impl Default for DetectorBank {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Set of detectors that clicked for one pair, as a 4-bit mask (bit i = Di+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ClickPattern(u8);

impl ClickPattern {
    pub const EMPTY: ClickPattern = ClickPattern(0);

    pub fn from_mask(mask: u8) -> Self {
        ClickPattern(mask & 0x0f)
    }

    pub fn of(detectors: &[Detector]) -> Self {
        ClickPattern(detectors.iter().fold(0, |m, d| m | (1 << d.index())))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, d: Detector) -> bool {
        self.0 & (1 << d.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn detectors(self) -> impl Iterator<Item = Detector> {
        Detector::ALL.into_iter().filter(move |d| self.contains(*d))
    }

    /// Exactly one click on each arm.
    pub fn is_cross_arm_pair(self) -> bool {
        (self.0 & 0b0011).count_ones() == 1 && (self.0 & 0b1100).count_ones() == 1
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, d) in self.detectors().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("}")
    }
}

/// Probability of every click pattern for a single emitted pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClickDistribution {
    probs: [f64; 16],
}

impl ClickDistribution {
    pub fn from_probabilities(probs: [f64; 16]) -> Self {
        Self { probs }
    }

    pub fn probability(&self, pattern: ClickPattern) -> f64 {
        self.probs[pattern.mask() as usize]
    }

    pub fn probabilities(&self) -> &[f64; 16] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClickPattern, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(|(m, &p)| (ClickPattern::from_mask(m as u8), p))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mean number of detectors that click per pair.
    pub fn expected_clicks(&self) -> f64 {
        self.iter().map(|(c, p)| c.len() as f64 * p).sum()
    }

    /// Total probability of the four cross-arm two-click patterns.
    pub fn cross_arm_probability(&self) -> f64 {
        self.iter()
            .filter(|(c, _)| c.is_cross_arm_pair())
            .map(|(_, p)| p)
            .sum()
    }

    /// Inverse-CDF sample for a uniform draw `u ∈ [0, 1)`.
    pub fn sample(&self, u: f64) -> ClickPattern {
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (m, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last_nonzero = m;
            if u < acc {
                return ClickPattern::from_mask(m as u8);
            }
        }
        ClickPattern::from_mask(last_nonzero as u8)
    }
}

/// Click distribution on one arm's detector pair (2-bit mask) for `photons`
/// photons entering its secondary splitter.
fn arm_clicks(photons: u8, efficiency: f64) -> [f64; 4] {
    // Per-photon fate: detected on the first detector, on the second, or lost.
    let fates = [(0b01u8, efficiency / 2.0), (0b10, efficiency / 2.0), (0b00, 1.0 - efficiency)];
    let mut out = [0.0; 4];
    match photons {
        0 => out[0] = 1.0,
        1 => {
            for (mask, p) in fates {
                out[mask as usize] += p;
            }
        }
        2 => {
            for (m1, p1) in fates {
                for (m2, p2) in fates {
                    out[(m1 | m2) as usize] += p1 * p2;
                }
            }
        }
        _ => unreachable!("at most two photons per arm"),
    }
    out
}

/// Click-pattern distribution after the number-resolving detection stage.
///
/// Dark counts are a time-domain effect and are not included.
pub fn click_distribution(dist: &OutputDistribution, bank: &DetectorBank) -> ClickDistribution {
    let eta = bank.efficiency;
    let mut probs = [0.0; 16];
    for (n3, n4, weight) in [(2u8, 0u8, dist.p20), (0, 2, dist.p02), (1, 1, dist.p11)] {
        if weight == 0.0 {
            continue;
        }
        let arm3 = arm_clicks(n3, eta);
        let arm4 = arm_clicks(n4, eta);
        for (m3, p3) in arm3.iter().enumerate() {
            for (m4, p4) in arm4.iter().enumerate() {
                probs[m3 | (m4 << 2)] += weight * p3 * p4;
            }
        }
    }
    ClickDistribution { probs }
}

/// One photon on a bare 50/50 splitter with a detector on each output.
///
/// The transmitted-port detector is reported as D1 (arm 3) and the
/// reflected-port detector as D3 (arm 4).
pub fn single_photon_split(efficiency: f64) -> Result<ClickDistribution, OpticsError> {
    if !unit_interval(efficiency) {
        return Err(OpticsError::InvalidEfficiency(efficiency));
    }
    let mut probs = [0.0; 16];
    probs[ClickPattern::of(&[Detector::D1]).mask() as usize] = efficiency / 2.0;
    probs[ClickPattern::of(&[Detector::D3]).mask() as usize] = efficiency / 2.0;
    probs[0] = 1.0 - efficiency;
    Ok(ClickDistribution { probs })
}
