//! Randomness certification for Bell-test timetag data.
//!
//! Time-tag files from two stations are matched into coincidences, the CHSH
//! value is estimated from per-setting correlations, and the resulting bit
//! sequences are scored with Lempel-Ziv complexity and a statistical battery.

// `!(x > 0.0)` is deliberate: NaN must fail every range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chsh;
pub mod coincidence;
pub mod complexity;
pub mod encode;
pub mod ingest;
pub mod nist;
pub mod report;
pub mod synth;

pub use chsh::{chsh, correlation, tally, ChshError, ChshResult, CodeMap, JointCounts, SignMode};
pub use coincidence::{
    count_matches, match_indices, match_streams, scan_delay, subset, CoincidenceConfig, CoincidenceError,
    CoincidenceEvent, CoincidenceSequence, DelayScanResult, ScanGrid, TimeReference,
};
pub use complexity::{complexity, complexity_profile, lz76_count, normalized_k, ComplexityError, ComplexityResult};
pub use encode::{binarize_times, decode_codes, encode_codes, encode_joint, BinarySequence, EncodeError, Encoding};
pub use ingest::{
    discover_runs, load_run, load_station, Condition, DetectionEvent, IngestError, RunBundle, Station, StationStream,
};
pub use nist::{battery, BatteryVerdict, NistError, Status, TestKind, TestResult};
pub use report::{analyze_paths, analyze_run, AnalysisConfig, DelaySpec, EncoderChoice, RunReport};
pub use synth::{gen_bell_run, gen_reference, write_run, ReferenceKind, SynthConfig, SynthError};

/// Any failure along the analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Coincidence(#[from] CoincidenceError),
    #[error(transparent)]
    Chsh(#[from] ChshError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Complexity(#[from] ComplexityError),
    #[error(transparent)]
    Nist(#[from] NistError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Report(String),
}
