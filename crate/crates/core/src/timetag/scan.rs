use super::{
    derive_seed, CoincidenceFilter, EventStream, PairLabel, RateEstimate, SourceConfig,
    TimetagError, TimingConfig,
};
use crate::optics::{DetectorBank, InterferometerConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Coincidence rates measured at one delay setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub delay_fs: f64,
    pub seed: u64,
    pub rates: BTreeMap<PairLabel, RateEstimate>,
}

impl ScanPoint {
    pub fn rate(&self, label: PairLabel) -> RateEstimate {
        self.rates[&label]
    }

    /// Sum of the four cross-arm labels.
    pub fn cross_arm(&self) -> RateEstimate {
        let duration = self.rates[&PairLabel::D1D2].duration_s;
        let counts = self
            .rates
            .iter()
            .filter(|(l, _)| l.is_cross_arm())
            .map(|(_, r)| r.counts)
            .sum();
        RateEstimate::new(counts, duration)
    }
}

/// Simulate and count coincidences at each delay.
///
/// Point `i` runs with seed `derive_seed(source.seed, i)`; points are
/// evaluated in parallel and returned in input order.
pub fn scan_delay(
    delays_fs: &[f64],
    source: &SourceConfig,
    interf: &InterferometerConfig,
    bank: &DetectorBank,
    timing: &TimingConfig,
) -> Result<Vec<ScanPoint>, TimetagError> {
    if delays_fs.len() < 2 {
        return Err(TimetagError::TooFewPoints(delays_fs.len()));
    }
    source.validate()?;
    timing.validate()?;
    delays_fs
        .par_iter()
        .enumerate()
        .map(|(i, &delay)| {
            let point_source = SourceConfig {
                seed: derive_seed(source.seed, i as u64),
                ..*source
            };
            let point_interf = interf.with_delay(delay)?;
            let events = EventStream::new(&point_source, &point_interf, bank, timing)?;
            let mut counts: BTreeMap<PairLabel, u64> =
                PairLabel::ALL.iter().map(|&l| (l, 0)).collect();
            for c in CoincidenceFilter::new(events, timing) {
                *counts.get_mut(&c.pair).expect("all labels present") += 1;
            }
            Ok(ScanPoint {
                delay_fs: delay,
                seed: point_source.seed,
                rates: counts
                    .into_iter()
                    .map(|(l, n)| (l, RateEstimate::new(n, source.duration_s)))
                    .collect(),
            })
        })
        .collect()
}
