use super::special::igamc;
use super::{StatsError, TestReport};
use crate::bitpipe::BitStream;

/// Block size, category bounds and reference probabilities for one length
/// regime of the longest-run test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongestRunParameters {
    pub block_len: usize,
    /// Runs `≤ lowest` share the first category.
    pub lowest: usize,
    /// Runs `≥ highest` share the last category.
    pub highest: usize,
    pub probabilities: &'static [f64],
}

// Category probabilities used by the NIST SP 800-22 reference implementation.
const PI_M8: [f64; 4] = [0.21484375, 0.3671875, 0.23046875, 0.1875];
const PI_M128: [f64; 6] = [
    0.1174035788,
    0.242955959,
    0.249363483,
    0.17517706,
    0.102701071,
    0.112398847,
];
const PI_M10000: [f64; 7] = [0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727];

pub const MIN_LONGEST_RUN_BITS: usize = 128;

/// Parameter regime for a sequence of `n` bits.
pub fn longest_run_parameters(n: usize) -> Result<LongestRunParameters, StatsError> {
    if n < MIN_LONGEST_RUN_BITS {
        return Err(StatsError::SequenceTooShort {
            needed: MIN_LONGEST_RUN_BITS,
            got: n,
        });
    }
    Ok(if n < 6272 {
        LongestRunParameters {
            block_len: 8,
            lowest: 1,
            highest: 4,
            probabilities: &PI_M8,
        }
    } else if n < 750_000 {
        LongestRunParameters {
            block_len: 128,
            lowest: 4,
            highest: 9,
            probabilities: &PI_M128,
        }
    } else {
        LongestRunParameters {
            block_len: 10_000,
            lowest: 10,
            highest: 16,
            probabilities: &PI_M10000,
        }
    })
}

/// Longest run of ones within non-overlapping blocks.
pub fn longest_run_test(bits: &BitStream) -> Result<TestReport, StatsError> {
    let params = longest_run_parameters(bits.len())?;
    let blocks = bits.len() / params.block_len;
    let k = params.probabilities.len() - 1;
    let mut freq = vec![0u64; k + 1];

    let mut it = bits.iter();
    for _ in 0..blocks {
        let (mut run, mut longest) = (0usize, 0usize);
        for b in it.by_ref().take(params.block_len) {
            if b {
                run += 1;
                longest = longest.max(run);
            } else {
                run = 0;
            }
        }
        let category = longest.clamp(params.lowest, params.highest) - params.lowest;
        freq[category] += 1;
    }

    let nb = blocks as f64;
    let chi2: f64 = freq
        .iter()
        .zip(params.probabilities)
        .map(|(&v, &pi)| (v as f64 - nb * pi).powi(2) / (nb * pi))
        .sum();
    let p = igamc(k as f64 / 2.0, chi2 / 2.0)?;
    Ok(TestReport::new("LongestRun", vec![p], chi2, true))
}
