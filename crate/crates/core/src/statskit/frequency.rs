use super::special::{erfc, igamc, normal_cdf};
use super::{StatsError, TestReport};
use crate::bitpipe::BitStream;
use std::f64::consts::SQRT_2;

/// Recommended minimum length for the frequency-type tests.
const MIN_BITS: usize = 100;

/// Monobit test: `P = erfc(|S|/√(2n))` with `S = Σ(2bᵢ − 1)`.
pub fn frequency_test(bits: &BitStream) -> Result<TestReport, StatsError> {
    let n = bits.len();
    if n == 0 {
        return Err(StatsError::EmptyStream);
    }
    let sum = 2 * bits.ones() as i64 - n as i64;
    let s_obs = sum.unsigned_abs() as f64 / (n as f64).sqrt();
    let p = erfc(s_obs / SQRT_2);
    Ok(TestReport::new("Frequency", vec![p], s_obs, n >= MIN_BITS))
}

/// Frequency within non-overlapping blocks of `block_len` bits; a trailing
/// partial block is ignored.
pub fn block_frequency_test(bits: &BitStream, block_len: usize) -> Result<TestReport, StatsError> {
    let n = bits.len();
    if block_len == 0 || n / block_len == 0 {
        return Err(StatsError::InvalidBlockLength {
            block: block_len,
            n,
        });
    }
    let blocks = n / block_len;
    let mut it = bits.iter();
    let mut sum = 0.0;
    for _ in 0..blocks {
        let ones = it.by_ref().take(block_len).filter(|&b| b).count();
        let pi = ones as f64 / block_len as f64;
        sum += (pi - 0.5) * (pi - 0.5);
    }
    let chi2 = 4.0 * block_len as f64 * sum;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0)?;
    Ok(TestReport::new("BlockFrequency", vec![p], chi2, n >= MIN_BITS))
}

/// Runs test. When the frequency pre-test fails the report is marked not
/// applicable and carries P = 0.
pub fn runs_test(bits: &BitStream) -> Result<TestReport, StatsError> {
    let n = bits.len();
    if n == 0 {
        return Err(StatsError::EmptyStream);
    }
    let nf = n as f64;
    let pi = bits.ones() as f64 / nf;
    let mut runs = 1u64;
    let mut prev = None;
    for b in bits.iter() {
        if prev.is_some_and(|p| p != b) {
            runs += 1;
        }
        prev = Some(b);
    }
    let v = runs as f64;
    if (pi - 0.5).abs() >= 2.0 / nf.sqrt() {
        return Ok(TestReport::new("Runs", vec![0.0], v, false));
    }
    let spread = pi * (1.0 - pi);
    let p = erfc((v - 2.0 * nf * spread).abs() / (2.0 * (2.0 * nf).sqrt() * spread));
    Ok(TestReport::new("Runs", vec![p], v, true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CusumMode {
    Forward,
    Backward,
}

/// Cumulative sums test: maximal excursion of the ±1 random walk, run from
/// the start (forward) or from the end (backward).
pub fn cusum_test(bits: &BitStream, mode: CusumMode) -> Result<TestReport, StatsError> {
    let n = bits.len();
    if n == 0 {
        return Err(StatsError::EmptyStream);
    }
    let step = |b: bool| if b { 1i64 } else { -1 };
    let (mut s, mut z) = (0i64, 0i64);
    let mut track = |b: bool| {
        s += step(b);
        z = z.max(s.abs());
    };
    match mode {
        CusumMode::Forward => bits.iter().for_each(&mut track),
        CusumMode::Backward => (0..n).rev().for_each(|i| track(bits.get(i).expect("in range"))),
    }
    let p = cusum_p_value(n as i64, z);
    let name = match mode {
        CusumMode::Forward => "CumulativeSums-forward",
        CusumMode::Backward => "CumulativeSums-backward",
    };
    Ok(TestReport::new(name, vec![p], z as f64, n >= MIN_BITS))
}

/// Two-sided excursion tail, with the summation bounds truncated toward
/// zero exactly as integer division does in the reference implementation.
fn cusum_p_value(n: i64, z: i64) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let zf = z as f64;
    let ratio = n / z;
    let mut sum1 = 0.0;
    for k in (-ratio + 1) / 4..=(ratio - 1) / 4 {
        let k = k as f64;
        sum1 += normal_cdf((4.0 * k + 1.0) * zf / sqrt_n) - normal_cdf((4.0 * k - 1.0) * zf / sqrt_n);
    }
    let mut sum2 = 0.0;
    for k in (-ratio - 3) / 4..=(ratio - 1) / 4 {
        let k = k as f64;
        sum2 += normal_cdf((4.0 * k + 3.0) * zf / sqrt_n) - normal_cdf((4.0 * k + 1.0) * zf / sqrt_n);
    }
    1.0 - sum1 + sum2
}
