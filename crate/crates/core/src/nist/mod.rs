//! Six tests from the NIST SP 800-22 statistical suite and the all-pass
//! battery verdict.
//!
//! Each test maps a bit string to a p-value. A test passes when
//! `p >= alpha`. Inputs shorter than a test's minimum length produce a
//! [`Status::TooShort`] result with no p-value.

mod frequency;
mod rank;
mod runs;
pub mod special;
mod spectral;

pub use frequency::{block_frequency, monobit};
pub use rank::{gf2_rank, matrix_rank, matrix_rank_with, rank_probabilities};
pub use runs::{longest_run, runs};
pub use spectral::{dft_spectral, SPECTRAL_THRESHOLD_CONSTANT};

use thiserror::Error;

use crate::encode::BinarySequence;

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_BLOCK_SIZE: usize = 128;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NistError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("block size {block} is unusable for n = {n} (need block >= 20 and at least one block)")]
    BlockTooSmall { block: usize, n: usize },
    #[error("sequence of {got} bits is shorter than the required {min}")]
    SequenceTooShort { min: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The runs test prerequisite (frequency close to 1/2) failed; p is 0.
    PrerequisiteFailed,
    TooShort {
        min: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Monobit,
    BlockFrequency,
    Runs,
    LongestRun,
    MatrixRank,
    Spectral,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::Monobit,
        TestKind::BlockFrequency,
        TestKind::Runs,
        TestKind::LongestRun,
        TestKind::MatrixRank,
        TestKind::Spectral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Monobit => "monobit",
            TestKind::BlockFrequency => "block_frequency",
            TestKind::Runs => "runs",
            TestKind::LongestRun => "longest_run",
            TestKind::MatrixRank => "matrix_rank",
            TestKind::Spectral => "dft_spectral",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub kind: TestKind,
    pub p_value: Option<f64>,
    pub pass: bool,
    pub statistic: f64,
    pub status: Status,
    pub params: Vec<(&'static str, f64)>,
    pub warnings: Vec<String>,
}

impl TestResult {
    fn new(kind: TestKind, p_value: f64, statistic: f64) -> Self {
        let mut r = Self {
            kind,
            p_value: Some(p_value.clamp(0.0, 1.0)),
            pass: false,
            statistic,
            status: Status::Ok,
            params: Vec::new(),
            warnings: Vec::new(),
        };
        r.judge(DEFAULT_ALPHA);
        r
    }

    fn too_short(kind: TestKind, min: usize) -> Self {
        Self {
            kind,
            p_value: None,
            pass: false,
            statistic: f64::NAN,
            status: Status::TooShort { min },
            params: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn param(mut self, name: &'static str, value: f64) -> Self {
        self.params.push((name, value));
        self
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn get_param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    /// Re-evaluates the pass flag at `alpha` and records it.
    pub fn judge(&mut self, alpha: f64) {
        self.pass = matches!(self.p_value, Some(p) if p >= alpha);
        if let Some(slot) = self.params.iter_mut().find(|(k, _)| *k == "alpha") {
            slot.1 = alpha;
        } else {
            self.params.push(("alpha", alpha));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryVerdict {
    pub results: Vec<TestResult>,
    pub alpha: f64,
    pub overall: bool,
}

impl BatteryVerdict {
    pub fn get(&self, kind: TestKind) -> &TestResult {
        self.results
            .iter()
            .find(|r| r.kind == kind)
            .expect("battery holds every test")
    }

    pub fn failed(&self) -> impl Iterator<Item = &TestResult> {
        self.results.iter().filter(|r| !r.pass)
    }
}

fn run_one(kind: TestKind, bits: &BinarySequence) -> TestResult {
    let outcome = match kind {
        TestKind::Monobit => monobit(bits),
        TestKind::BlockFrequency => block_frequency(bits, DEFAULT_BLOCK_SIZE),
        TestKind::Runs => runs(bits),
        TestKind::LongestRun => longest_run(bits),
        TestKind::MatrixRank => matrix_rank(bits),
        TestKind::Spectral => dft_spectral(bits),
    };
    match outcome {
        Ok(r) => r,
        Err(NistError::SequenceTooShort { min, .. }) => TestResult::too_short(kind, min),
        Err(NistError::BlockTooSmall { block, .. }) => TestResult::too_short(kind, block.max(20)),
        Err(NistError::EmptySequence) => TestResult::too_short(kind, 1),
    }
}

/// Runs all six tests; the sequence is random only if every one passes.
pub fn battery(bits: &BinarySequence, alpha: f64) -> BatteryVerdict {
    let results: Vec<TestResult> = std::thread::scope(|scope| {
        let handles: Vec<_> = TestKind::ALL
            .iter()
            .map(|&kind| scope.spawn(move || run_one(kind, bits)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("test thread panicked"))
            .collect()
    });
    let results: Vec<TestResult> = results
        .into_iter()
        .map(|mut r| {
            r.judge(alpha);
            r
        })
        .collect();
    let overall = results.iter().all(|r| r.pass);
    BatteryVerdict {
        results,
        alpha,
        overall,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::Encoding;

    #[test]
    fn all_zeros_fail_monobit_and_rank() {
        let b = BinarySequence::new(vec![0; 1_000_000], Encoding::Raw).unwrap();
        let v = battery(&b, DEFAULT_ALPHA);
        assert!(!v.overall);
        assert!(!v.get(TestKind::Monobit).pass);
        assert!(!v.get(TestKind::MatrixRank).pass);
        assert_eq!(v.results.len(), 6);
    }

    #[test]
    fn short_input_is_flagged_not_scored() {
        let b = BinarySequence::new((0..8488).map(|i| ((i * 7 + i / 3) % 2) as u8).collect(), Encoding::Raw).unwrap();
        let v = battery(&b, DEFAULT_ALPHA);
        let rank = v.get(TestKind::MatrixRank);
        assert_eq!(rank.status, Status::TooShort { min: 38_912 });
        assert_eq!(rank.p_value, None);
        assert!(!rank.pass);
        assert!(!v.overall);
    }

    #[test]
    fn alpha_recorded_and_applied() {
        let b = BinarySequence::parse("1011010101").unwrap();
        let v = battery(&b, 0.6);
        let m = v.get(TestKind::Monobit);
        assert_eq!(m.get_param("alpha"), Some(0.6));
        assert!(!m.pass);
        let v = battery(&b, 0.5);
        assert!(v.get(TestKind::Monobit).pass);
    }
}
