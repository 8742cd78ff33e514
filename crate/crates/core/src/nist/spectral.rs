use rustfft::{num_complex::Complex, FftPlanner};

use super::special::erfc;
use super::{NistError, TestKind, TestResult};
use crate::encode::BinarySequence;

/// Peak threshold is `sqrt(n * ln(1 / 0.05))`, the corrected constant of the
/// revised suite.
pub const SPECTRAL_THRESHOLD_CONSTANT: f64 = 2.995_732_273_553_991; // ln(20)

/// Counts spectral peaks below the 95% threshold over the first n/2 bins.
pub fn dft_spectral(bits: &BinarySequence) -> Result<TestResult, NistError> {
    let n = bits.len();
    if n == 0 {
        return Err(NistError::EmptySequence);
    }
    let mut buf: Vec<Complex<f64>> = bits
        .bits()
        .iter()
        .map(|&b| Complex::new(2.0 * b as f64 - 1.0, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let nf = n as f64;
    let threshold = (SPECTRAL_THRESHOLD_CONSTANT * nf).sqrt();
    let below = buf[..n / 2].iter().filter(|c| c.norm() < threshold).count();
    let expected = 0.95 * nf / 2.0;
    let d = (below as f64 - expected) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    let p = erfc(d.abs() / 2f64.sqrt());
    let mut r = TestResult::new(TestKind::Spectral, p, d)
        .param("threshold", threshold)
        .param("threshold_constant", SPECTRAL_THRESHOLD_CONSTANT)
        .param("n0", expected)
        .param("n1", below as f64);
    if n < 1000 {
        r.warnings.push(format!("n = {n} is below the recommended 1000 bits"));
    }
    Ok(r)
}
