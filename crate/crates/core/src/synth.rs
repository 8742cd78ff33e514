//! Synthetic Bell runs and reference bit sequences.
//!
//! A run is a Poisson stream of photon pairs. For every pair each station
//! draws a fair setting bit, Alice's outcome is a fair ±1 and Bob's outcome
//! agrees with it with probability `(1 + E) / 2`, where
//! `E(a, b) = visibility * cos 2(a - b)` for polarizer angles `a`, `b`.
//! Each detection survives with probability `efficiency`, gets Gaussian
//! timing jitter, and Bob's recorded time is `t * (1 + drift_rate) +
//! drift_offset`. Optional uncorrelated background singles can be added at
//! both stations.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use thiserror::Error;

use crate::chsh::CodeMap;
use crate::coincidence::ScanGrid;
use crate::encode::{BinarySequence, Encoding};
use crate::ingest::{run_file_names, Condition, DetectionEvent, RunBundle, Station, StationStream};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bad reference parameters: {0}")]
    BadParameters(String),
    #[error("run has no name or no events")]
    EmptyBundle,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub name: String,
    /// Pairs per second.
    pub pair_rate: f64,
    /// Seconds.
    pub duration: f64,
    pub visibility: f64,
    /// Alice's two polarizer angles, degrees.
    pub angles_a: (f64, f64),
    /// Bob's two polarizer angles, degrees.
    pub angles_b: (f64, f64),
    /// Detection probability, applied independently at each station.
    pub efficiency: f64,
    /// Standard deviation of timing jitter, seconds.
    pub jitter_sigma: f64,
    /// Relative rate error of Bob's clock.
    pub drift_rate: f64,
    /// Constant offset of Bob's clock, seconds.
    pub drift_offset: f64,
    /// Uncorrelated singles per second at each station.
    pub background_rate: f64,
    pub code_map: CodeMap,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            name: "synthetic".to_string(),
            pair_rate: 10_000.0,
            duration: 1.0,
            visibility: 1.0,
            angles_a: (0.0, 45.0),
            angles_b: (22.5, 67.5),
            efficiency: 1.0,
            jitter_sigma: 0.0,
            drift_rate: 0.0,
            drift_offset: 0.0,
            background_rate: 0.0,
            code_map: CodeMap::default(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        if !(self.pair_rate > 0.0 && self.pair_rate.is_finite()) {
            return bad("pair_rate must be positive");
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad("duration must be positive");
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return bad("visibility must lie in [0, 1]");
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return bad("efficiency must lie in (0, 1]");
        }
        if !(self.jitter_sigma >= 0.0 && self.jitter_sigma.is_finite()) {
            return bad("jitter_sigma must be non-negative");
        }
        if !(self.background_rate >= 0.0 && self.background_rate.is_finite()) {
            return bad("background_rate must be non-negative");
        }
        if !(self.drift_rate > -1.0 && self.drift_rate.is_finite() && self.drift_offset.is_finite()) {
            return bad("drift parameters must be finite and drift_rate > -1");
        }
        let angles = [self.angles_a.0, self.angles_a.1, self.angles_b.0, self.angles_b.1];
        if angles.iter().any(|a| !a.is_finite()) {
            return bad("angles must be finite");
        }
        if self.name.is_empty() {
            return bad("name must not be empty");
        }
        Ok(())
    }

    /// Analytic correlation for setting indices `a`, `b`.
    pub fn expected_correlation(&self, a: usize, b: usize) -> f64 {
        let alpha = if a == 0 { self.angles_a.0 } else { self.angles_a.1 };
        let beta = if b == 0 { self.angles_b.0 } else { self.angles_b.1 };
        self.visibility * (2.0 * (alpha - beta).to_radians()).cos()
    }
}

/// Fixed-seed configuration showing clock drift degrading complexity.
///
/// With drift on, the stations stay in sync for only about a tenth of the
/// run; the rest of the coincidence stream is sparse accidentals, so the
/// inter-arrival encoding splits into a dense, mostly-zero block and a
/// sparse, mostly-one block. With drift off the coincidences form a single
/// Poisson stream. Analyse it with [`DRIFT_DEMO_WINDOW`] and
/// [`DRIFT_DEMO_GRID`].
pub fn drift_demo_config(drift: bool) -> SynthConfig {
    SynthConfig {
        name: if drift { "drift-on" } else { "drift-off" }.to_string(),
        pair_rate: 10_000.0,
        duration: 10.0,
        visibility: 0.95,
        efficiency: 0.3,
        jitter_sigma: 10e-9,
        drift_rate: if drift { 1e-7 } else { 0.0 },
        drift_offset: 0.0,
        background_rate: 27_000.0,
        seed: 1722,
        ..SynthConfig::default()
    }
}

/// Coincidence half-window used with [`drift_demo_config`], seconds.
pub const DRIFT_DEMO_WINDOW: f64 = 50e-9;

/// Delay grid used with [`drift_demo_config`].
pub const DRIFT_DEMO_GRID: ScanGrid = ScanGrid {
    min: -1200e-9,
    max: 100e-9,
    step: 10e-9,
};

fn fair_outcome(rng: &mut ChaCha8Rng) -> i8 {
    if rng.random_bool(0.5) {
        1
    } else {
        -1
    }
}

fn into_stream(station: Station, mut events: Vec<DetectionEvent>) -> Result<StationStream, SynthError> {
    events.retain(|e| e.t >= 0.0);
    events.sort_by(|x, y| x.t.total_cmp(&y.t));
    events.dedup_by(|later, earlier| later.t <= earlier.t);
    if events.is_empty() {
        return Err(SynthError::InvalidConfig(format!("no events generated at {station}")));
    }
    StationStream::new(station, events).map_err(|e| SynthError::InvalidConfig(e.to_string()))
}

/// Generates a run. Identical configurations give identical runs.
pub fn gen_bell_run(config: &SynthConfig) -> Result<RunBundle, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let gap = Exp::new(config.pair_rate).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let jitter = Normal::new(0.0, config.jitter_sigma).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let map = config.code_map;
    let bob_clock = |t: f64| t * (1.0 + config.drift_rate) + config.drift_offset;

    let mut correlations = [[0.0; 2]; 2];
    for (a, row) in correlations.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            *e = config.expected_correlation(a, b);
        }
    }

    let expected = (config.pair_rate * config.duration * config.efficiency * 1.1) as usize + 16;
    let mut alice = Vec::with_capacity(expected);
    let mut bob = Vec::with_capacity(expected);
    let mut t = 0.0;
    loop {
        t += gap.sample(&mut rng);
        if t >= config.duration {
            break;
        }
        let sa = usize::from(rng.random_bool(0.5));
        let sb = usize::from(rng.random_bool(0.5));
        let oa = fair_outcome(&mut rng);
        let agree = rng.random::<f64>() < 0.5 * (1.0 + correlations[sa][sb]);
        let ob = if agree { oa } else { -oa };
        let keep_a = rng.random::<f64>() < config.efficiency;
        let keep_b = rng.random::<f64>() < config.efficiency;
        let ja = jitter.sample(&mut rng);
        let jb = jitter.sample(&mut rng);
        if keep_a {
            alice.push(DetectionEvent {
                t: t + ja,
                code: map.encode(sa, oa),
            });
        }
        if keep_b {
            bob.push(DetectionEvent {
                t: bob_clock(t + jb),
                code: map.encode(sb, ob),
            });
        }
    }

    if config.background_rate > 0.0 {
        let bg = Exp::new(config.background_rate).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
        for (events, is_bob) in [(&mut alice, false), (&mut bob, true)] {
            let mut t = 0.0;
            loop {
                t += bg.sample(&mut rng);
                if t >= config.duration {
                    break;
                }
                let setting = usize::from(rng.random_bool(0.5));
                let code = map.encode(setting, fair_outcome(&mut rng));
                let t = if is_bob { bob_clock(t) } else { t };
                events.push(DetectionEvent { t, code });
            }
        }
    }

    Ok(RunBundle {
        name: config.name.clone(),
        alice: into_stream(Station::Alice, alice)?,
        bob: into_stream(Station::Bob, bob)?,
        condition: Some(Condition::Synthetic),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceKind {
    /// The pattern repeated.
    Periodic(Vec<u8>),
    /// Sign of `sin(2π f1 i) + sin(2π f2 i)` against `threshold`.
    Quasiperiodic { f1: f64, f2: f64, threshold: f64 },
    /// Logistic map iterates compared with `threshold`.
    Logistic { r: f64, x0: f64, threshold: f64 },
    /// ChaCha8 output bits.
    Prng { seed: u64 },
}

impl ReferenceKind {
    /// Two tones whose frequency ratio is the golden ratio.
    pub fn default_quasiperiodic() -> Self {
        let golden = 0.5 * (1.0 + 5f64.sqrt());
        ReferenceKind::Quasiperiodic {
            f1: 0.05,
            f2: 0.05 * golden,
            threshold: 0.0,
        }
    }

    fn label(&self) -> String {
        match self {
            ReferenceKind::Periodic(p) => {
                format!(
                    "periodic({})",
                    p.iter().map(|b| char::from(b'0' + b)).collect::<String>()
                )
            }
            ReferenceKind::Quasiperiodic { f1, f2, .. } => format!("quasiperiodic({f1},{f2})"),
            ReferenceKind::Logistic { r, x0, .. } => format!("logistic({r},{x0})"),
            ReferenceKind::Prng { seed } => format!("prng({seed})"),
        }
    }
}

pub fn gen_reference(kind: &ReferenceKind, n: usize) -> Result<BinarySequence, SynthError> {
    let bad = |m: &str| Err(SynthError::BadParameters(m.to_string()));
    if n < 2 {
        return bad("length must be at least 2");
    }
    let bits: Vec<u8> = match kind {
        ReferenceKind::Periodic(pattern) => {
            if pattern.is_empty() || pattern.iter().any(|&b| b > 1) {
                return bad("pattern must be a non-empty bit string");
            }
            pattern.iter().copied().cycle().take(n).collect()
        }
        &ReferenceKind::Quasiperiodic { f1, f2, threshold } => {
            let ok = |f: f64| f > 0.0 && f < 0.5;
            if !ok(f1) || !ok(f2) || f1 == f2 {
                return bad("frequencies must be distinct and in (0, 0.5)");
            }
            let tau = std::f64::consts::TAU;
            (0..n)
                .map(|i| {
                    let i = i as f64;
                    u8::from((tau * f1 * i).sin() + (tau * f2 * i).sin() > threshold)
                })
                .collect()
        }
        &ReferenceKind::Logistic { r, x0, threshold } => {
            if !(r > 0.0 && r <= 4.0) || !(x0 > 0.0 && x0 < 1.0) {
                return bad("need 0 < r <= 4 and 0 < x0 < 1");
            }
            let mut x = x0;
            (0..n)
                .map(|_| {
                    x = r * x * (1.0 - x);
                    u8::from(x > threshold)
                })
                .collect()
        }
        &ReferenceKind::Prng { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let word: u64 = rng.random();
                out.extend((0..64).map(|k| ((word >> k) & 1) as u8).take(n - out.len()));
            }
            out
        }
    };
    BinarySequence::new(bits, Encoding::Reference(kind.label())).map_err(|e| SynthError::BadParameters(e.to_string()))
}

/// Writes the four station files of `bundle` into `dir`.
pub fn write_run(bundle: &RunBundle, dir: &Path) -> Result<Vec<PathBuf>, SynthError> {
    if bundle.name.is_empty() || bundle.alice.is_empty() || bundle.bob.is_empty() {
        return Err(SynthError::EmptyBundle);
    }
    std::fs::create_dir_all(dir).map_err(|source| SynthError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let contents = [
        bundle.alice.time_file_contents(),
        bundle.alice.code_file_contents(),
        bundle.bob.time_file_contents(),
        bundle.bob.code_file_contents(),
    ];
    let mut written = Vec::with_capacity(4);
    for (file, text) in run_file_names(&bundle.name).iter().zip(contents) {
        let path = dir.join(file);
        std::fs::write(&path, text).map_err(|source| SynthError::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
