use super::special::{erfc, igamc};
use super::{NistError, Status, TestKind, TestResult};
use crate::encode::BinarySequence;

/// Runs test. Requires `|pi - 1/2| < 2/sqrt(n)`; otherwise p is 0.
pub fn runs(bits: &BinarySequence) -> Result<TestResult, NistError> {
    let b = bits.bits();
    let n = b.len();
    if n == 0 {
        return Err(NistError::EmptySequence);
    }
    let nf = n as f64;
    let ones = bits.ones();
    let pi = ones as f64 / nf;
    let tau = 2.0 / nf.sqrt();
    let v_obs = 1 + b.windows(2).filter(|w| w[0] != w[1]).count();
    // from integer counts so that s and its complement agree exactly
    let imbalance = (2 * ones).abs_diff(n) as f64 / (2.0 * nf);
    if imbalance >= tau {
        let mut r = TestResult::new(TestKind::Runs, 0.0, v_obs as f64)
            .param("pi", pi)
            .param("tau", tau);
        r.status = Status::PrerequisiteFailed;
        return Ok(r);
    }
    let spread = (ones * (n - ones)) as f64 / (nf * nf);
    let p = erfc((v_obs as f64 - 2.0 * nf * spread).abs() / (2.0 * (2.0 * nf).sqrt() * spread));
    Ok(TestResult::new(TestKind::Runs, p, v_obs as f64)
        .param("pi", pi)
        .param("tau", tau))
}

struct LongestRunTable {
    block: usize,
    /// Run lengths at or below `low` share the first category; at or
    /// above `low + probs.len() - 1` the last.
    low: usize,
    probs: &'static [f64],
}

const TABLE_8: LongestRunTable = LongestRunTable {
    block: 8,
    low: 1,
    probs: &[0.214_843_75, 0.367_187_5, 0.230_468_75, 0.187_5],
};

const TABLE_128: LongestRunTable = LongestRunTable {
    block: 128,
    low: 4,
    probs: &[
        0.117_403_578_8,
        0.242_955_959,
        0.249_363_483,
        0.175_177_06,
        0.102_701_071,
        0.112_398_847,
    ],
};

const TABLE_10000: LongestRunTable = LongestRunTable {
    block: 10_000,
    low: 10,
    probs: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
};

pub const LONGEST_RUN_MIN_BITS: usize = 128;

/// Longest run of ones within blocks, with block size chosen from n.
pub fn longest_run(bits: &BinarySequence) -> Result<TestResult, NistError> {
    let n = bits.len();
    if n < LONGEST_RUN_MIN_BITS {
        return Err(NistError::SequenceTooShort {
            min: LONGEST_RUN_MIN_BITS,
            got: n,
        });
    }
    let table = if n < 6272 {
        &TABLE_8
    } else if n < 750_000 {
        &TABLE_128
    } else {
        &TABLE_10000
    };
    let k = table.probs.len() - 1;
    let mut nu = vec![0usize; k + 1];
    let blocks = n / table.block;
    for chunk in bits.bits().chunks_exact(table.block) {
        let (mut longest, mut cur) = (0usize, 0usize);
        for &b in chunk {
            if b == 1 {
                cur += 1;
                longest = longest.max(cur);
            } else {
                cur = 0;
            }
        }
        let cat = longest.clamp(table.low, table.low + k) - table.low;
        nu[cat] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = nu
        .iter()
        .zip(table.probs)
        .map(|(&v, &p)| {
            let expect = nb * p;
            (v as f64 - expect).powi(2) / expect
        })
        .sum();
    let p = igamc(k as f64 / 2.0, chi2 / 2.0);
    let mut r = TestResult::new(TestKind::LongestRun, p, chi2)
        .param("block_size", table.block as f64)
        .param("blocks", nb)
        .param("categories", (k + 1) as f64);
    for (i, v) in nu.iter().enumerate() {
        const NAMES: [&str; 7] = ["nu0", "nu1", "nu2", "nu3", "nu4", "nu5", "nu6"];
        r = r.param(NAMES[i], *v as f64);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::Encoding;

    fn seq(bits: Vec<u8>) -> BinarySequence {
        BinarySequence::new(bits, Encoding::Raw).unwrap()
    }

    #[test]
    fn runs_hand_value() {
        // pi = 0.6, V = 7
        let r = runs(&BinarySequence::parse("1001101011").unwrap()).unwrap();
        assert_eq!(r.statistic, 7.0);
        assert!((r.p_value.unwrap() - 0.147_232_255_363_665_56).abs() < 1e-12);
    }

    #[test]
    fn alternation_fails() {
        let r = runs(&seq((0..1000).map(|i| (i % 2) as u8).collect())).unwrap();
        assert!(r.p_value.unwrap() < 1e-100);
        assert!(!r.pass);
    }

    #[test]
    fn prerequisite() {
        let r = runs(&seq(vec![1; 100])).unwrap();
        assert_eq!(r.status, Status::PrerequisiteFailed);
        assert_eq!(r.p_value, Some(0.0));
    }

    #[test]
    fn tables_are_distributions() {
        for t in [&TABLE_8, &TABLE_128, &TABLE_10000] {
            let s: f64 = t.probs.iter().sum();
            assert!((s - 1.0).abs() < 1e-3, "{s}");
        }
    }

    #[test]
    fn longest_run_block_choice() {
        let mk = |n: usize| seq((0..n).map(|i| ((i * 2_654_435_761usize) >> 7 & 1) as u8).collect());
        assert_eq!(longest_run(&mk(128)).unwrap().get_param("block_size"), Some(8.0));
        assert_eq!(longest_run(&mk(6272)).unwrap().get_param("block_size"), Some(128.0));
        assert_eq!(
            longest_run(&mk(750_000)).unwrap().get_param("block_size"),
            Some(10_000.0)
        );
        assert_eq!(
            longest_run(&mk(127)),
            Err(NistError::SequenceTooShort { min: 128, got: 127 })
        );
    }

    #[test]
    fn longest_run_extremes() {
        let r = longest_run(&seq(vec![1; 128])).unwrap();
        assert_eq!(r.get_param("nu3"), Some(16.0));
        assert!(r.p_value.unwrap() < 1e-6);
        let r = longest_run(&seq((0..6272).map(|i| (i % 2) as u8).collect())).unwrap();
        assert_eq!(r.get_param("nu0"), Some(49.0));
        assert!(r.p_value.unwrap() < 1e-10);
    }
}
