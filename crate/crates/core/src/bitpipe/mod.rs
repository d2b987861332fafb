//! Clocked bit extraction, bit error rate and von Neumann unbiasing.
//!
//! Time is cut into clock periods `[k/f, (k+1)/f)`. A period holding one
//! same-arm coincidence yields a data bit (D1D2 → 0, D3D4 → 1) at clock index
//! `k`; a period holding two or more yields an error record one clock later.

pub mod format;
mod stream;

pub use format::{BitFormat, FormatError};
pub use stream::BitStream;

use crate::timetag::{CoincidenceEvent, PairLabel, PS_PER_SECOND};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BitpipeError {
    #[error("clock frequency must be positive and finite, got {0} Hz")]
    InvalidFrequency(f64),
    #[error("cross-arm coincidence {label} at {time_ps} ps must be routed to the purity monitor")]
    CrossArmLabelPresent { label: PairLabel, time_ps: i64 },
    #[error("coincidences are not time-sorted at index {0}")]
    UnsortedInput(usize),
    #[error("first-order BER model is only valid for R_B/2f <= 1, got {0}")]
    ModelOutOfRange(f64),
    #[error("rate must be non-negative and finite, got {0} Hz")]
    InvalidRate(f64),
    #[error("bias of an empty stream is undefined")]
    EmptyStream,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockConfig {
    frequency_hz: f64,
}

impl ClockConfig {
    pub fn new(frequency_hz: f64) -> Result<Self, BitpipeError> {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
            return Err(BitpipeError::InvalidFrequency(frequency_hz));
        }
        Ok(Self { frequency_hz })
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    /// Clock period containing `time_ps`.
    pub fn period_of(&self, time_ps: i64) -> u64 {
        let t = time_ps.max(0) as u128;
        if self.frequency_hz.fract() == 0.0 && self.frequency_hz < 1e15 {
            // Exact for integer frequencies.
            (t * self.frequency_hz as u128 / 1_000_000_000_000u128) as u64
        } else {
            (t as f64 * self.frequency_hz / PS_PER_SECOND).floor() as u64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    Zero,
    One,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitRecord {
    pub symbol: Symbol,
    pub clock_index: u64,
    /// Qualifying coincidences in the source period.
    pub events: u32,
}

/// Incremental form of [`extract_bits`] for long coincidence streams.
///
/// Each finished period produces at most one record, so `push` returns at
/// most one record. Records land on `max(natural index, previous + 1)`: an
/// error from period `k` takes index `k+1`, and a data bit from period
/// `k+1` then moves to `k+2`.
#[derive(Debug, Clone)]
pub struct BitExtractor {
    clock: ClockConfig,
    current_period: Option<u64>,
    current_events: u32,
    current_symbol: Symbol,
    last_index: Option<u64>,
    last_time: i64,
    seen: usize,
}

impl BitExtractor {
    pub fn new(clock: ClockConfig) -> Self {
        Self {
            clock,
            current_period: None,
            current_events: 0,
            current_symbol: Symbol::Zero,
            last_index: None,
            last_time: i64::MIN,
            seen: 0,
        }
    }

    pub fn push(&mut self, c: &CoincidenceEvent) -> Result<Option<BitRecord>, BitpipeError> {
        let symbol = match c.pair {
            PairLabel::D1D2 => Symbol::Zero,
            PairLabel::D3D4 => Symbol::One,
            label => {
                return Err(BitpipeError::CrossArmLabelPresent {
                    label,
                    time_ps: c.time_ps,
                })
            }
        };
        if c.time_ps < self.last_time {
            return Err(BitpipeError::UnsortedInput(self.seen));
        }
        self.last_time = c.time_ps;
        self.seen += 1;

        let period = self.clock.period_of(c.time_ps);
        if self.current_period == Some(period) {
            self.current_events += 1;
            return Ok(None);
        }
        let finished = self.flush();
        self.current_period = Some(period);
        self.current_events = 1;
        self.current_symbol = symbol;
        Ok(finished)
    }

    pub fn finish(mut self) -> Option<BitRecord> {
        self.flush()
    }

    fn flush(&mut self) -> Option<BitRecord> {
        let period = self.current_period.take()?;
        let (symbol, natural) = if self.current_events >= 2 {
            (Symbol::Error, period + 1)
        } else {
            (self.current_symbol, period)
        };
        let clock_index = match self.last_index {
            Some(last) => natural.max(last + 1),
            None => natural,
        };
        self.last_index = Some(clock_index);
        Some(BitRecord {
            symbol,
            clock_index,
            events: self.current_events,
        })
    }
}

pub fn extract_bits(
    coincidences: &[CoincidenceEvent],
    clock: &ClockConfig,
) -> Result<Vec<BitRecord>, BitpipeError> {
    let mut extractor = BitExtractor::new(*clock);
    let mut out = Vec::new();
    for c in coincidences {
        out.extend(extractor.push(c)?);
    }
    out.extend(extractor.finish());
    Ok(out)
}

/// First-order bit error rate `R_B / 2f`.
pub fn ber_model(rate_hz: f64, clock: &ClockConfig) -> Result<f64, BitpipeError> {
    if !(rate_hz.is_finite() && rate_hz >= 0.0) {
        return Err(BitpipeError::InvalidRate(rate_hz));
    }
    let ber = rate_hz / (2.0 * clock.frequency_hz);
    if ber > 1.0 {
        return Err(BitpipeError::ModelOutOfRange(ber));
    }
    Ok(ber)
}

/// Error fraction of Poisson arrivals at `rate_hz`, all orders:
/// `P(≥2)/P(≥1)` with mean `μ = R_B/f` per period.
///
/// Reduces to `ber_model` as `μ → 0`; the relative gap grows like `μ/6`.
pub fn ber_poisson(rate_hz: f64, clock: &ClockConfig) -> Result<f64, BitpipeError> {
    if !(rate_hz.is_finite() && rate_hz >= 0.0) {
        return Err(BitpipeError::InvalidRate(rate_hz));
    }
    let mu = rate_hz / clock.frequency_hz;
    if mu == 0.0 {
        return Ok(0.0);
    }
    // 1 − μ e^{−μ} / (1 − e^{−μ}), with expm1 for small μ.
    let nonempty = -(-mu).exp_m1();
    Ok(1.0 - mu * (-mu).exp() / nonempty)
}

pub fn empirical_ber(records: &[BitRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let errors = records.iter().filter(|r| r.symbol == Symbol::Error).count();
    errors as f64 / records.len() as f64
}

/// One line of the error log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorLogEntry {
    pub clock_index: u64,
    pub n_events_in_period: u32,
}

/// Data bits in record order, with error records split off.
pub fn split_records(records: &[BitRecord]) -> (BitStream, Vec<ErrorLogEntry>) {
    let mut bits = BitStream::with_capacity(records.len());
    let mut errors = Vec::new();
    for r in records {
        match r.symbol {
            Symbol::Zero => bits.push(false),
            Symbol::One => bits.push(true),
            Symbol::Error => errors.push(ErrorLogEntry {
                clock_index: r.clock_index,
                n_events_in_period: r.events,
            }),
        }
    }
    (bits, errors)
}

pub fn error_log_csv(entries: &[ErrorLogEntry]) -> String {
    let mut out = String::from("clock_index,n_events_in_period\n");
    for e in entries {
        writeln!(out, "{},{}", e.clock_index, e.n_events_in_period).expect("write to string");
    }
    out
}

/// Von Neumann extractor over non-overlapping pairs: 01 → 0, 10 → 1,
/// 00 and 11 dropped, an odd trailing bit dropped.
pub fn von_neumann(stream: &BitStream) -> BitStream {
    let mut out = BitStream::with_capacity(stream.len() / 4);
    let mut it = stream.iter();
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        if a != b {
            out.push(a);
        }
    }
    out
}

/// Fraction of ones and its binomial standard error.
pub fn bias_estimate(stream: &BitStream) -> Result<(f64, f64), BitpipeError> {
    if stream.is_empty() {
        return Err(BitpipeError::EmptyStream);
    }
    let n = stream.len() as f64;
    let p = stream.ones() as f64 / n;
    Ok((p, (p * (1.0 - p) / n).sqrt()))
}

/// Expected `von_neumann` output/input length ratio for i.i.d. input.
pub fn expected_yield(p_one: f64) -> f64 {
    p_one * (1.0 - p_one)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(pair: PairLabel, ms: f64) -> CoincidenceEvent {
        CoincidenceEvent {
            pair,
            time_ps: (ms * 1e9).round() as i64,
        }
    }

    fn symbols(records: &[BitRecord]) -> Vec<(Symbol, u64)> {
        records.iter().map(|r| (r.symbol, r.clock_index)).collect()
    }

    fn khz() -> ClockConfig {
        ClockConfig::new(1000.0).unwrap()
    }

    #[test]
    fn one_event_per_period() {
        let r = extract_bits(&[c(PairLabel::D1D2, 0.5), c(PairLabel::D3D4, 1.2)], &khz()).unwrap();
        assert_eq!(symbols(&r), vec![(Symbol::Zero, 0), (Symbol::One, 1)]);
    }

    #[test]
    fn two_events_give_error_at_next_clock() {
        let r = extract_bits(&[c(PairLabel::D1D2, 0.2), c(PairLabel::D3D4, 0.7)], &khz()).unwrap();
        assert_eq!(symbols(&r), vec![(Symbol::Error, 1)]);
        assert_eq!(r[0].events, 2);
    }

    #[test]
    fn data_after_error_moves_one_clock() {
        let r = extract_bits(
            &[
                c(PairLabel::D1D2, 0.2),
                c(PairLabel::D1D2, 0.3),
                c(PairLabel::D3D4, 1.5),
                c(PairLabel::D1D2, 3.1),
            ],
            &khz(),
        )
        .unwrap();
        assert_eq!(
            symbols(&r),
            vec![(Symbol::Error, 1), (Symbol::One, 2), (Symbol::Zero, 3)]
        );
    }

    #[test]
    fn empty_input() {
        assert!(extract_bits(&[], &khz()).unwrap().is_empty());
        assert_eq!(empirical_ber(&[]), 0.0);
    }

    #[test]
    fn rejects_cross_arm_and_unsorted() {
        assert!(matches!(
            extract_bits(&[c(PairLabel::D1D3, 0.1)], &khz()),
            Err(BitpipeError::CrossArmLabelPresent { .. })
        ));
        assert_eq!(
            extract_bits(&[c(PairLabel::D1D2, 0.5), c(PairLabel::D1D2, 0.1)], &khz()),
            Err(BitpipeError::UnsortedInput(1))
        );
    }

    #[test]
    fn period_boundaries_are_exact() {
        let clk = khz();
        assert_eq!(clk.period_of(999_999_999), 0);
        assert_eq!(clk.period_of(1_000_000_000), 1);
        let odd = ClockConfig::new(3.0).unwrap();
        assert_eq!(odd.period_of(333_333_333_334), 1);
        let frac = ClockConfig::new(2.5).unwrap();
        assert_eq!(frac.period_of(400_000_000_001), 1);
    }

    #[test]
    fn ber_model_values() {
        let ber = ber_model(668.0, &ClockConfig::new(10_000.0).unwrap()).unwrap();
        assert!((ber - 0.0334).abs() < 1e-15);
        assert_eq!(ber_model(0.0, &khz()).unwrap(), 0.0);
        let ber = ber_model(668.0, &ClockConfig::new(500_000.0).unwrap()).unwrap();
        assert!((ber - 6.68e-4).abs() < 1e-15);
        assert!(matches!(
            ber_model(668.0, &ClockConfig::new(300.0).unwrap()),
            Err(BitpipeError::ModelOutOfRange(_))
        ));
    }

    #[test]
    fn poisson_ber_tends_to_first_order_model() {
        for f in [1e4, 1e5, 1e6, 1e7] {
            let clk = ClockConfig::new(f).unwrap();
            let mu = 668.0 / f;
            let exact = ber_poisson(668.0, &clk).unwrap();
            let model = ber_model(668.0, &clk).unwrap();
            assert!(((model - exact) / model - mu / 6.0).abs() < mu * mu, "f={f}");
        }
    }

    #[test]
    fn empirical_ber_counts() {
        let rec = |s| BitRecord { symbol: s, clock_index: 0, events: 1 };
        let r = [rec(Symbol::Zero), rec(Symbol::One), rec(Symbol::Error), rec(Symbol::One)];
        assert_eq!(empirical_ber(&r), 0.25);
        assert_eq!(empirical_ber(&[rec(Symbol::Error); 5]), 1.0);
    }

    #[test]
    fn von_neumann_examples() {
        let vn = |s: &str| von_neumann(&s.parse().unwrap()).to_ascii_string();
        assert_eq!(vn("0110"), "01");
        assert_eq!(vn("0000"), "");
        assert_eq!(vn("01101100"), "01");
        assert_eq!(vn("011"), "0");
    }

    #[test]
    fn bias_examples() {
        assert_eq!(bias_estimate(&"1111".parse().unwrap()).unwrap(), (1.0, 0.0));
        assert_eq!(bias_estimate(&"0101".parse().unwrap()).unwrap(), (0.5, 0.25));
        assert_eq!(bias_estimate(&BitStream::new()), Err(BitpipeError::EmptyStream));
    }

    #[test]
    fn yield_examples() {
        assert_eq!(expected_yield(0.5), 0.25);
        assert_eq!(expected_yield(0.0), 0.0);
        assert!((expected_yield(0.60198) - 0.2396).abs() < 5e-6);
    }

    #[test]
    fn split_and_log() {
        let recs = [
            BitRecord { symbol: Symbol::One, clock_index: 0, events: 1 },
            BitRecord { symbol: Symbol::Error, clock_index: 3, events: 2 },
            BitRecord { symbol: Symbol::Zero, clock_index: 4, events: 1 },
        ];
        let (bits, log) = split_records(&recs);
        assert_eq!(bits.to_ascii_string(), "10");
        assert_eq!(error_log_csv(&log), "clock_index,n_events_in_period\n3,2\n");
    }
}
