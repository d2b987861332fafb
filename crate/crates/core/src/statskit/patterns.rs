use super::special::igamc;
use super::{as_bits, StatsError, TestReport};
use crate::bitpipe::BitStream;

/// Largest pattern length accepted; counts need `2^m` slots.
const MAX_PATTERN_LEN: usize = 24;

/// Overlapping `m`-bit pattern counts with wraparound, indexed by the
/// pattern read most-significant bit first. Counts sum to `n`.
pub fn pattern_counts(bits: &[u8], m: usize) -> Vec<u64> {
    let n = bits.len();
    let mut counts = vec![0u64; 1 << m];
    if n == 0 {
        return counts;
    }
    if m == 0 {
        counts[0] = n as u64;
        return counts;
    }
    let mask = (1usize << m) - 1;
    let mut window = 0usize;
    for i in 0..m - 1 {
        window = (window << 1) | bits[i % n] as usize;
    }
    for i in 0..n {
        window = ((window << 1) | bits[(i + m - 1) % n] as usize) & mask;
        counts[window] += 1;
    }
    counts
}

fn check_pattern_len(m: usize, min: usize) -> Result<(), StatsError> {
    if m < min || m > MAX_PATTERN_LEN {
        return Err(StatsError::InvalidPatternLength(m));
    }
    Ok(())
}

/// `Σ (c/n)·ln(c/n)` over the wraparound `m`-pattern counts.
fn phi(bits: &[u8], m: usize) -> f64 {
    let n = bits.len() as f64;
    pattern_counts(bits, m)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum()
}

/// Approximate entropy test with pattern length `m`.
pub fn approx_entropy_test(bits: &BitStream, m: usize) -> Result<TestReport, StatsError> {
    check_pattern_len(m, 1)?;
    if bits.is_empty() {
        return Err(StatsError::EmptyStream);
    }
    let v = as_bits(bits);
    let n = v.len() as f64;
    let apen = phi(&v, m) - phi(&v, m + 1);
    let chi2 = (2.0 * n * (std::f64::consts::LN_2 - apen)).max(0.0);
    let p = igamc(2f64.powi(m as i32 - 1), chi2 / 2.0)?;
    let applicable = n > 2f64.powi(m as i32 + 1);
    Ok(TestReport::new("ApproximateEntropy", vec![p], chi2, applicable))
}

/// `ψ²_k = 2^k/n · Σ c² − n`, zero for `k ≤ 0`.
fn psi_squared(bits: &[u8], k: isize) -> f64 {
    if k <= 0 {
        return 0.0;
    }
    let n = bits.len() as f64;
    let sum_sq: f64 = pattern_counts(bits, k as usize)
        .into_iter()
        .map(|c| (c as f64) * (c as f64))
        .sum();
    2f64.powi(k as i32) / n * sum_sq - n
}

/// Serial test with pattern length `m`; reports `P₁` (first difference)
/// and `P₂` (second difference).
pub fn serial_test(bits: &BitStream, m: usize) -> Result<TestReport, StatsError> {
    check_pattern_len(m, 2)?;
    if bits.is_empty() {
        return Err(StatsError::EmptyStream);
    }
    let v = as_bits(bits);
    let m = m as isize;
    let psi_m = psi_squared(&v, m);
    let psi_m1 = psi_squared(&v, m - 1);
    let psi_m2 = psi_squared(&v, m - 2);
    let del1 = (psi_m - psi_m1).max(0.0);
    let del2 = (psi_m - 2.0 * psi_m1 + psi_m2).max(0.0);
    let p1 = igamc(2f64.powi(m as i32 - 2), del1 / 2.0)?;
    let p2 = igamc(2f64.powi(m as i32 - 3), del2 / 2.0)?;
    let log2_n = (v.len() as f64).log2().floor() as isize;
    Ok(TestReport::new("Serial", vec![p1, p2], del1, m < log2_n - 2))
}
