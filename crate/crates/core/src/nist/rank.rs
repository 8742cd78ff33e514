use super::{NistError, TestKind, TestResult};
use crate::encode::BinarySequence;

/// Rank over GF(2) of a matrix whose rows are the low `cols` bits of each word.
pub fn gf2_rank(rows: &mut [u64], cols: usize) -> usize {
    let mut rank = 0;
    for col in (0..cols).rev() {
        let bit = 1u64 << col;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Probability that a uniformly random `m x q` binary matrix has rank `r`.
fn rank_probability(r: usize, m: usize, q: usize) -> f64 {
    let exponent = (r * (q + m - r)) as f64 - (m * q) as f64;
    let mut p = exponent.exp2();
    for i in 0..r {
        let i = i as f64;
        p *= (1.0 - (i - q as f64).exp2()) * (1.0 - (i - m as f64).exp2()) / (1.0 - (i - r as f64).exp2());
    }
    p
}

/// `(P[full rank], P[full rank - 1], P[lower])` for `m x q` matrices.
pub fn rank_probabilities(m: usize, q: usize) -> [f64; 3] {
    let full = m.min(q);
    let p_full = rank_probability(full, m, q);
    let p_minus = rank_probability(full - 1, m, q);
    [p_full, p_minus, 1.0 - p_full - p_minus]
}

pub fn matrix_rank(bits: &BinarySequence) -> Result<TestResult, NistError> {
    matrix_rank_with(bits, 32, 32)
}

/// Binary matrix rank test over disjoint `m x q` matrices filled row by row.
pub fn matrix_rank_with(bits: &BinarySequence, m: usize, q: usize) -> Result<TestResult, NistError> {
    assert!((2..=64).contains(&q) && m >= 2, "matrix shape {m}x{q} unsupported");
    let n = bits.len();
    let min = 38 * m * q;
    if n < min {
        return Err(NistError::SequenceTooShort { min, got: n });
    }
    let full = m.min(q);
    let mut counts = [0usize; 3];
    let mut rows = vec![0u64; m];
    for block in bits.bits().chunks_exact(m * q) {
        for (row, chunk) in rows.iter_mut().zip(block.chunks_exact(q)) {
            *row = chunk.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        }
        let r = gf2_rank(&mut rows, q);
        let cat = if r == full {
            0
        } else if r + 1 == full {
            1
        } else {
            2
        };
        counts[cat] += 1;
    }
    let matrices = (n / (m * q)) as f64;
    let probs = rank_probabilities(m, q);
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, p)| (c as f64 - p * matrices).powi(2) / (p * matrices))
        .sum();
    let p = (-chi2 / 2.0).exp();
    Ok(TestResult::new(TestKind::MatrixRank, p, chi2)
        .param("rows", m as f64)
        .param("cols", q as f64)
        .param("matrices", matrices)
        .param("full_rank", counts[0] as f64)
        .param("full_rank_minus_1", counts[1] as f64)
        .param("lower_rank", counts[2] as f64))
}
