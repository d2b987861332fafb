//! Flags describing the simulated source, interferometer and detectors.

use crate::error::{CliError, CliResult};
use clap::Args;
use qrng_core::optics::{
    click_distribution, default_coherence_time_fs, output_distribution, ClickPattern, Detector,
    DetectorBank, InterferometerConfig,
};
use qrng_core::timetag::TimingConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PhysicsArgs {
    /// Interference visibility ceiling V0 in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub visibility_ceiling: f64,
    /// Coherence time in fs [default: filter-limited value, about 222 fs].
    #[arg(long)]
    pub coherence_time: Option<f64>,
    /// Detection efficiency of every detector.
    #[arg(long, default_value_t = 1.0)]
    pub efficiency: f64,
    /// Dark count rate per detector, Hz.
    #[arg(long, default_value_t = 0.0)]
    pub dark_rate: f64,
    /// Gaussian timing jitter per click, ps.
    #[arg(long, default_value_t = 300.0)]
    pub jitter_ps: f64,
    /// Non-paralyzable dead time per detector, ns.
    #[arg(long, default_value_t = 50.0)]
    pub dead_time_ns: f64,
    /// Coincidence window, ns.
    #[arg(long, default_value_t = 3.0)]
    pub window_ns: f64,
}

impl PhysicsArgs {
    pub fn coherence_time_fs(&self) -> f64 {
        self.coherence_time.unwrap_or_else(default_coherence_time_fs)
    }

    pub fn interferometer(&self, delay_fs: f64) -> CliResult<InterferometerConfig> {
        InterferometerConfig::new(delay_fs, self.coherence_time_fs(), 0.5, self.visibility_ceiling)
            .map_err(CliError::usage)
    }

    pub fn bank(&self) -> CliResult<DetectorBank> {
        DetectorBank::new(self.efficiency, self.dark_rate).map_err(CliError::usage)
    }

    pub fn timing(&self) -> CliResult<TimingConfig> {
        TimingConfig::new(self.jitter_ps, self.dead_time_ns, self.window_ns).map_err(CliError::usage)
    }

    /// Pair rate whose zero-delay D1D2 + D3D4 coincidence rate is `bit_rate_hz`.
    pub fn pair_rate_for_bit_rate(&self, bit_rate_hz: f64) -> CliResult<f64> {
        if !(bit_rate_hz.is_finite() && bit_rate_hz >= 0.0) {
            return Err(CliError::Usage(format!("bit rate must be non-negative, got {bit_rate_hz}")));
        }
        if bit_rate_hz == 0.0 {
            return Ok(0.0);
        }
        let clicks = click_distribution(&output_distribution(&self.interferometer(0.0)?).map_err(CliError::usage)?, &self.bank()?);
        let p_bit = clicks.probability(ClickPattern::of(&[Detector::D1, Detector::D2]))
            + clicks.probability(ClickPattern::of(&[Detector::D3, Detector::D4]));
        if p_bit <= 0.0 {
            return Err(CliError::Usage(
                "no same-arm coincidences are possible with these detector settings".into(),
            ));
        }
        Ok(bit_rate_hz / p_bit)
    }

    pub fn configs_json(&self, interf: &InterferometerConfig) -> CliResult<serde_json::Value> {
        Ok(serde_json::json!({
            "interferometer": interf,
            "detectors": self.bank()?,
            "timing": self.timing()?,
        }))
    }
}
