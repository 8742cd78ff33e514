use super::special::{erfc, igamc};
use super::{NistError, TestKind, TestResult};
use crate::encode::BinarySequence;

/// Frequency (monobit) test: `p = erfc(|S_n| / sqrt(2n))`, `S_n = #1 - #0`.
pub fn monobit(bits: &BinarySequence) -> Result<TestResult, NistError> {
    let n = bits.len();
    if n == 0 {
        return Err(NistError::EmptySequence);
    }
    let ones = bits.ones() as i64;
    let s_n = 2 * ones - n as i64;
    let s_obs = (s_n as f64).abs() / (n as f64).sqrt();
    let mut r = TestResult::new(TestKind::Monobit, erfc(s_obs / 2f64.sqrt()), s_obs)
        .param("n", n as f64)
        .param("s_n", s_n as f64);
    if n < 100 {
        r.warnings.push(format!("n = {n} is below the recommended 100 bits"));
    }
    Ok(r)
}

/// Frequency test within blocks of `block` bits; the partial tail block is dropped.
pub fn block_frequency(bits: &BinarySequence, block: usize) -> Result<TestResult, NistError> {
    let n = bits.len();
    let blocks = n.checked_div(block).unwrap_or(0);
    if block < 20 || blocks == 0 {
        return Err(NistError::BlockTooSmall { block, n });
    }
    let sum_sq: f64 = bits
        .bits()
        .chunks_exact(block)
        .map(|chunk| {
            let pi = chunk.iter().map(|&b| b as usize).sum::<usize>() as f64 / block as f64;
            (pi - 0.5) * (pi - 0.5)
        })
        .sum();
    let chi2 = 4.0 * block as f64 * sum_sq;
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    let mut r = TestResult::new(TestKind::BlockFrequency, p, chi2)
        .param("block_size", block as f64)
        .param("blocks", blocks as f64);
    if (block as f64) <= 0.01 * n as f64 {
        r.warnings
            .push(format!("block size {block} is not above 1% of n = {n}"));
    }
    if blocks >= 100 {
        r.warnings.push(format!("{blocks} blocks; at most 99 are recommended"));
    }
    Ok(r)
}
