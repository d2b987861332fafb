use super::{DetectionEvent, SourceConfig, TimetagError, TimingConfig, PS_PER_SECOND};
use crate::optics::{
    click_distribution, output_distribution, ClickDistribution, Detector, DetectorBank,
    InterferometerConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Jitter draws beyond this many standard deviations are redrawn, which
/// bounds how far a click can precede its pair's emission time.
pub const JITTER_TRUNCATION_SIGMAS: f64 = 8.0;

/// Stable per-index seed (splitmix64 finaliser over seed and index).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct DarkSource {
    detector: Detector,
    rng: ChaCha8Rng,
    gap: Exp<f64>,
    next_ps: f64,
}

impl DarkSource {
    fn advance(&mut self) {
        self.next_ps += self.gap.sample(&mut self.rng) * PS_PER_SECOND;
    }

    fn next_time(&self) -> i64 {
        self.next_ps.round() as i64
    }
}

/// Lazily generated, time-sorted click stream.
///
/// Pair emission, pattern choice and jitter draw from ChaCha stream 0; the
/// dark counts of detector Dk draw from stream k. The output therefore does
/// not depend on how far the iterator is driven or how it is consumed.
pub struct EventStream {
    duration_ps: i64,
    pair_rng: ChaCha8Rng,
    pair_gap: Option<Exp<f64>>,
    next_emission_ps: f64,
    clicks: ClickDistribution,
    jitter: Option<Normal<f64>>,
    jitter_bound_ps: i64,
    pending: BinaryHeap<Reverse<(i64, Detector)>>,
    darks: Vec<DarkSource>,
    dead_time_ps: i64,
    last_click: [Option<i64>; 4],
    dropped_dead_time: u64,
}

impl EventStream {
    pub fn new(
        source: &SourceConfig,
        interf: &InterferometerConfig,
        bank: &DetectorBank,
        timing: &TimingConfig,
    ) -> Result<Self, TimetagError> {
        source.validate()?;
        timing.validate()?;
        let clicks = click_distribution(&output_distribution(interf)?, bank);

        let mut pair_rng = ChaCha8Rng::seed_from_u64(source.seed);
        pair_rng.set_stream(0);
        let pair_gap = if source.pair_rate_hz > 0.0 {
            Some(Exp::new(source.pair_rate_hz).map_err(|_| TimetagError::InvalidRate(source.pair_rate_hz))?)
        } else {
            None
        };
        let jitter = if timing.jitter_sigma_ps > 0.0 {
            Some(Normal::new(0.0, timing.jitter_sigma_ps).map_err(|e| {
                TimetagError::InvalidTiming(e.to_string())
            })?)
        } else {
            None
        };
        let jitter_bound_ps = (JITTER_TRUNCATION_SIGMAS * timing.jitter_sigma_ps).ceil() as i64;

        let mut darks = Vec::new();
        if bank.dark_rate_hz() > 0.0 {
            let gap = Exp::new(bank.dark_rate_hz())
                .map_err(|_| TimetagError::InvalidRate(bank.dark_rate_hz()))?;
            for d in Detector::ALL {
                let mut rng = ChaCha8Rng::seed_from_u64(source.seed);
                rng.set_stream(d.index() as u64 + 1);
                let mut dark = DarkSource {
                    detector: d,
                    rng,
                    gap,
                    next_ps: 0.0,
                };
                dark.advance();
                darks.push(dark);
            }
        }

        let mut stream = Self {
            duration_ps: source.duration_ps(),
            pair_rng,
            pair_gap,
            next_emission_ps: 0.0,
            clicks,
            jitter,
            jitter_bound_ps,
            pending: BinaryHeap::new(),
            darks,
            dead_time_ps: timing.dead_time_ps(),
            last_click: [None; 4],
            dropped_dead_time: 0,
        };
        stream.draw_next_emission();
        Ok(stream)
    }

    /// Clicks removed so far by the dead-time filter.
    pub fn dropped_by_dead_time(&self) -> u64 {
        self.dropped_dead_time
    }

    fn pairs_exhausted(&self) -> bool {
        self.pair_gap.is_none() || self.next_emission_ps >= self.duration_ps as f64
    }

    fn draw_next_emission(&mut self) {
        if let Some(gap) = &self.pair_gap {
            self.next_emission_ps += gap.sample(&mut self.pair_rng) * PS_PER_SECOND;
        }
    }

    fn draw_jitter(&mut self) -> f64 {
        let Some(normal) = &self.jitter else {
            return 0.0;
        };
        let bound = JITTER_TRUNCATION_SIGMAS * normal.std_dev();
        loop {
            let j = normal.sample(&mut self.pair_rng);
            if j.abs() <= bound {
                return j;
            }
        }
    }

    /// Emit the pending pair: one pattern draw, then one jitter draw per
    /// clicking detector in label order.
    fn emit_pair(&mut self) {
        let emission = self.next_emission_ps;
        let pattern = self.clicks.sample(self.pair_rng.random::<f64>());
        for d in pattern.detectors() {
            let t = (emission + self.draw_jitter()).round() as i64;
            if (0..self.duration_ps).contains(&t) {
                self.pending.push(Reverse((t, d)));
            }
        }
        self.draw_next_emission();
    }

    /// Every click from a pair not yet emitted is strictly later than this.
    fn horizon(&self) -> i64 {
        if self.pairs_exhausted() {
            i64::MAX
        } else {
            self.next_emission_ps.floor() as i64 - self.jitter_bound_ps - 1
        }
    }

    fn earliest_dark(&self) -> Option<(usize, (i64, Detector))> {
        self.darks
            .iter()
            .enumerate()
            .map(|(i, s)| (i, (s.next_time(), s.detector)))
            .filter(|(_, (t, _))| *t < self.duration_ps)
            .min_by_key(|(_, key)| *key)
    }

    fn next_raw(&mut self) -> Option<(i64, Detector)> {
        loop {
            let photon = self.pending.peek().map(|Reverse(k)| *k);
            let dark = self.earliest_dark();
            let candidate = match (photon, dark) {
                (Some(p), Some((_, d))) => Some(p.min(d)),
                (Some(p), None) => Some(p),
                (None, Some((_, d))) => Some(d),
                (None, None) => None,
            };
            match candidate {
                Some(c) if c.0 < self.horizon() => {
                    if photon == Some(c) {
                        self.pending.pop();
                    } else if let Some((i, _)) = dark {
                        self.darks[i].advance();
                    }
                    return Some(c);
                }
                _ if !self.pairs_exhausted() => self.emit_pair(),
                None => return None,
                Some(_) => unreachable!("horizon is unbounded once pairs are exhausted"),
            }
        }
    }
}

impl Iterator for EventStream {
    type Item = DetectionEvent;

    fn next(&mut self) -> Option<DetectionEvent> {
        while let Some((t, d)) = self.next_raw() {
            let last = &mut self.last_click[d.index()];
            if let Some(prev) = *last {
                if t - prev < self.dead_time_ps {
                    self.dropped_dead_time += 1;
                    continue;
                }
            }
            *last = Some(t);
            return Some(DetectionEvent::new(d, t));
        }
        None
    }
}
