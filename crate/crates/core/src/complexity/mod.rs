//! Lempel–Ziv (1976) production complexity and its normalization.
//!
//! The sequence is parsed left to right into words. A word is extended while
//! it can still be copied from the part of the sequence that precedes its
//! last symbol (the copy may overlap the word itself); the first symbol that
//! breaks the copy closes the word. A final word that runs into the end of
//! the sequence is counted even though it is a pure copy. `c(n)` is the
//! number of words and
//!
//! ```text
//! K(n) = c(n) * log2(n) / n
//! ```
//!
//! which tends to 1 for an unbiased random source, to 0 for regular input,
//! and can exceed 1 for short random strings.
//!
//! [`lz76_count`] runs in O(n log n) through the longest-previous-factor
//! table; [`lz76_count_quadratic`] is the classic Kaspar–Schuster scan and
//! is kept as a second, independent route.

mod suffix;

pub use suffix::{lcp_array, longest_previous_factor, suffix_array};

use thiserror::Error;

use crate::encode::BinarySequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexityError {
    #[error("normalization needs n >= 2, got {0}")]
    LengthTooShort(usize),
    #[error("checkpoint {checkpoint} is invalid for a sequence of length {n}")]
    BadCheckpoint { checkpoint: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityResult {
    pub c: usize,
    pub n: usize,
    pub k: f64,
}

/// Start positions of the words of the exhaustive parse.
fn word_starts(symbols: &[u8]) -> Vec<usize> {
    let n = symbols.len();
    let lpf = longest_previous_factor(symbols);
    let mut starts = Vec::new();
    let mut i = 0;
    while i < n {
        starts.push(i);
        i += lpf[i] as usize + 1;
    }
    starts
}

/// Word count of an arbitrary symbol sequence.
pub fn lz76_count_symbols(symbols: &[u8]) -> usize {
    word_starts(symbols).len()
}

pub fn lz76_count(bits: &BinarySequence) -> usize {
    lz76_count_symbols(bits.bits())
}

/// Kaspar–Schuster counter. Worst case O(n²); fine for short inputs.
pub fn lz76_count_quadratic(s: &[u8]) -> usize {
    let n = s.len();
    if n <= 1 {
        return n;
    }
    let (mut c, mut l, mut i, mut k, mut k_max) = (1, 1, 0, 1, 1);
    loop {
        if s[i + k - 1] == s[l + k - 1] {
            k += 1;
            if l + k > n {
                c += 1;
                break;
            }
        } else {
            k_max = k_max.max(k);
            i += 1;
            if i == l {
                c += 1;
                l += k_max;
                if l + 1 > n {
                    break;
                }
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    c
}

/// `K = c * log2(n) / n`.
pub fn normalized_k(c: usize, n: usize) -> Result<f64, ComplexityError> {
    if n < 2 {
        return Err(ComplexityError::LengthTooShort(n));
    }
    let nf = n as f64;
    Ok(c as f64 * nf.log2() / nf)
}

pub fn complexity(bits: &BinarySequence) -> Result<ComplexityResult, ComplexityError> {
    let n = bits.len();
    let c = lz76_count(bits);
    Ok(ComplexityResult {
        c,
        n,
        k: normalized_k(c, n)?,
    })
}

/// Complexity of each prefix length in `checkpoints` from a single parse.
///
/// The parse of a prefix coincides with the parse of the whole sequence cut
/// at the prefix end, so `c` at a checkpoint is the number of words that
/// start before it.
pub fn complexity_profile(
    bits: &BinarySequence,
    checkpoints: &[usize],
) -> Result<Vec<ComplexityResult>, ComplexityError> {
    let n = bits.len();
    let mut prev = 0;
    for &m in checkpoints {
        if m < 2 || m > n || m <= prev {
            return Err(ComplexityError::BadCheckpoint { checkpoint: m, n });
        }
        prev = m;
    }
    let starts = word_starts(bits.bits());
    checkpoints
        .iter()
        .map(|&m| {
            let c = starts.partition_point(|&s| s < m);
            Ok(ComplexityResult {
                c,
                n: m,
                k: normalized_k(c, m)?,
            })
        })
        .collect()
}
