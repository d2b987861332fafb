use super::special::erfc;
use super::{StatsError, TestReport};
use crate::bitpipe::BitStream;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::SQRT_2;

const MIN_SPECTRAL_BITS: usize = 1000;

/// How the discrete Fourier magnitudes are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DftMethod {
    #[default]
    Fft,
    /// Direct O(n²) evaluation of every bin.
    Direct,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_magnitudes(x: &[f64], bins: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    buf[..bins].iter().map(|c| c.norm()).collect()
}

fn direct_magnitudes(x: &[f64], bins: usize) -> Vec<f64> {
    let n = x.len();
    (0..bins)
        .map(|j| {
            let (mut re, mut im) = (0.0, 0.0);
            for (k, &v) in x.iter().enumerate() {
                // Reduce j·k mod n first so the angle stays accurate.
                let phase = ((j * k) % n) as f64 * std::f64::consts::TAU / n as f64;
                re += v * phase.cos();
                im -= v * phase.sin();
            }
            re.hypot(im)
        })
        .collect()
}

/// Spectral (DFT) test using the fast transform.
pub fn spectral_test(bits: &BitStream) -> Result<TestReport, StatsError> {
    spectral_test_with(bits, DftMethod::Fft)
}

pub fn spectral_test_with(bits: &BitStream, method: DftMethod) -> Result<TestReport, StatsError> {
    let n = bits.len();
    if n < 2 {
        return Err(StatsError::SequenceTooShort { needed: 2, got: n });
    }
    let x: Vec<f64> = bits.iter().map(|b| if b { 1.0 } else { -1.0 }).collect();
    let bins = n / 2;
    let mags = match method {
        DftMethod::Fft => fft_magnitudes(&x, bins),
        DftMethod::Direct => direct_magnitudes(&x, bins),
    };
    let nf = n as f64;
    let threshold = (20f64.ln() * nf).sqrt();
    let n1 = mags.iter().filter(|&&m| m < threshold).count() as f64;
    let n0 = 0.95 * nf / 2.0;
    let d = (n1 - n0) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    let p = erfc(d.abs() / SQRT_2);
    Ok(TestReport::new("FFT", vec![p], d, n >= MIN_SPECTRAL_BITS))
}
