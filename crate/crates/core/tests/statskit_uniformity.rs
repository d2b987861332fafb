//! P-values of fair-coin input must be Uniform(0, 1).

use qrng_core::bitpipe::BitStream;
use qrng_core::statskit::{ks_uniform, run_suite, serial_test, SuiteConfig, TestKind};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn fair_bits(n: usize, seed: u64) -> BitStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bytes = vec![0u8; n.div_ceil(8)];
    rng.fill_bytes(&mut bytes);
    BitStream::from_packed(bytes, n).unwrap()
}

#[test]
fn suite_p_values_are_uniform() {
    let config = SuiteConfig::default();
    let reports: Vec<_> = (0..500u64)
        .into_par_iter()
        .map(|s| run_suite(&fair_bits(100_000, 0x5eed_0000 + s), &config))
        .collect();
    for kind in TestKind::ALL {
        let columns = reports[0].get(kind).unwrap().p_values.len();
        for col in 0..columns {
            let ps: Vec<f64> = reports.iter().map(|r| r.get(kind).unwrap().p_values[col]).collect();
            let ks = ks_uniform(&ps).unwrap();
            assert!(ks.p_value >= 0.01, "{} P[{col}]: KS p = {}", kind.name(), ks.p_value);
        }
    }
    let failures = reports.iter().filter(|r| !r.overall_pass).count();
    // Ten P-values per report at α = 0.01 fail about 10% of reports.
    assert!(failures < 100, "{failures}");
}

#[test]
fn serial_p_values_are_uniform_at_one_megabit() {
    let (p1, p2): (Vec<f64>, Vec<f64>) = (0..200u64)
        .into_par_iter()
        .map(|s| {
            let r = serial_test(&fair_bits(1_000_000, 0xface_0000 + s), 16).unwrap();
            (r.p_values[0], r.p_values[1])
        })
        .unzip();
    assert!(ks_uniform(&p1).unwrap().p_value >= 0.01);
    assert!(ks_uniform(&p2).unwrap().p_value >= 0.01);
}
