//! Coincidence extraction between the two stations.
//!
//! Bob's clock is shifted by `delay` (added to every Bob time) and an Alice
//! event pairs with a Bob event when `|t_a - (t_b + delay)| <= t_w`, so `t_w`
//! is the half-width of the acceptance window. Matching is the greedy
//! two-pointer sweep: accept the current pair if it is inside the window,
//! otherwise drop whichever of the two events is earlier. On time-sorted
//! streams this yields a maximum-cardinality matching in linear time.

use thiserror::Error;

use crate::ingest::StationStream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoincidenceError {
    #[error("coincidence window must be positive, got {0}")]
    BadWindow(f64),
    #[error("delay scan grid is empty (min {min}, max {max}, step {step})")]
    EmptyScanGrid { min: f64, max: f64, step: f64 },
    #[error("code {0} is outside 0..=3")]
    BadCode(u8),
}

/// Which station's clock stamps a coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeReference {
    #[default]
    Alice,
    Bob,
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceConfig {
    /// Half-width of the acceptance window, seconds.
    pub t_w: f64,
    /// Added to Bob's times before comparison, seconds.
    pub delay: f64,
    pub time_ref: TimeReference,
}

impl CoincidenceConfig {
    pub fn new(t_w: f64, delay: f64) -> Self {
        Self {
            t_w,
            delay,
            time_ref: TimeReference::Alice,
        }
    }
}

/// Delay grid `min, min + step, ...` up to and including `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl ScanGrid {
    pub fn points(&self) -> Result<Vec<f64>, CoincidenceError> {
        let empty = CoincidenceError::EmptyScanGrid {
            min: self.min,
            max: self.max,
            step: self.step,
        };
        if !(self.step > 0.0) || !(self.min < self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Err(empty);
        }
        // Tolerate rounding so that `max` itself lands on the grid.
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| snap(self.min + k as f64 * self.step)).collect())
    }
}

/// Rounds sub-second delays to whole femtoseconds, removing the drift that
/// repeated step addition leaves in the last digits.
fn snap(d: f64) -> f64 {
    if d.abs() < 1.0 {
        (d * 1e15).round() / 1e15
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceEvent {
    pub t: f64,
    pub code_a: u8,
    pub code_b: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceSequence {
    pub events: Vec<CoincidenceEvent>,
    pub config: CoincidenceConfig,
}

impl CoincidenceSequence {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayScanResult {
    pub curve: Vec<(f64, usize)>,
    pub best_delay: f64,
    pub best_count: usize,
}

/// Index pairs `(alice, bob)` of the greedy matching.
pub fn match_indices(alice: &[f64], bob: &[f64], t_w: f64, delay: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < alice.len() && j < bob.len() {
        let ta = alice[i];
        let tb = bob[j] + delay;
        if (ta - tb).abs() <= t_w {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if ta < tb {
            i += 1;
        } else {
            j += 1;
        }
    }
    pairs
}

/// Number of coincidences the greedy matching finds; allocation-free.
pub fn count_matches(alice: &[f64], bob: &[f64], t_w: f64, delay: f64) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < alice.len() && j < bob.len() {
        let ta = alice[i];
        let tb = bob[j] + delay;
        if (ta - tb).abs() <= t_w {
            n += 1;
            i += 1;
            j += 1;
        } else if ta < tb {
            i += 1;
        } else {
            j += 1;
        }
    }
    n
}

/// Matches the two stations into a coincidence sequence ordered by Alice time.
pub fn match_streams(
    alice: &StationStream,
    bob: &StationStream,
    config: CoincidenceConfig,
) -> Result<CoincidenceSequence, CoincidenceError> {
    if !(config.t_w > 0.0) {
        return Err(CoincidenceError::BadWindow(config.t_w));
    }
    let ta = alice.times();
    let tb = bob.times();
    let (ea, eb) = (alice.events(), bob.events());
    let events = match_indices(&ta, &tb, config.t_w, config.delay)
        .into_iter()
        .map(|(i, j)| {
            let t = match config.time_ref {
                TimeReference::Alice => ea[i].t,
                TimeReference::Bob => eb[j].t + config.delay,
                TimeReference::Midpoint => 0.5 * (ea[i].t + eb[j].t + config.delay),
            };
            CoincidenceEvent {
                t,
                code_a: ea[i].code,
                code_b: eb[j].code,
            }
        })
        .collect();
    Ok(CoincidenceSequence { events, config })
}

/// Counts coincidences at every grid delay and picks the maximum.
///
/// Ties go to the delay with the smallest magnitude, then the smallest value.
pub fn scan_delay(
    alice: &StationStream,
    bob: &StationStream,
    t_w: f64,
    grid: ScanGrid,
) -> Result<DelayScanResult, CoincidenceError> {
    if !(t_w > 0.0) {
        return Err(CoincidenceError::BadWindow(t_w));
    }
    let points = grid.points()?;
    let ta = alice.times();
    let tb = bob.times();
    let curve: Vec<(f64, usize)> = points
        .into_iter()
        .map(|d| (d, count_matches(&ta, &tb, t_w, d)))
        .collect();
    let (best_delay, best_count) = curve
        .iter()
        .copied()
        .reduce(|best, cand| {
            let better = cand.1 > best.1
                || (cand.1 == best.1
                    && (cand.0.abs() < best.0.abs() || (cand.0.abs() == best.0.abs() && cand.0 < best.0)));
            if better {
                cand
            } else {
                best
            }
        })
        .expect("grid has at least one point");
    Ok(DelayScanResult {
        curve,
        best_delay,
        best_count,
    })
}

/// Keeps the coincidences whose codes equal `(code_a, code_b)`.
pub fn subset(seq: &CoincidenceSequence, code_a: u8, code_b: u8) -> Result<CoincidenceSequence, CoincidenceError> {
    for c in [code_a, code_b] {
        if c > 3 {
            return Err(CoincidenceError::BadCode(c));
        }
    }
    Ok(CoincidenceSequence {
        events: seq
            .events
            .iter()
            .filter(|e| e.code_a == code_a && e.code_b == code_b)
            .copied()
            .collect(),
        config: seq.config,
    })
}
