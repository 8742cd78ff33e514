//! Joint outcome tallies, correlations and the CHSH parameter.

use thiserror::Error;

use crate::coincidence::CoincidenceSequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChshError {
    #[error("coincidence sequence is empty")]
    EmptySequence,
    #[error("no coincidences for setting pair ({0}, {1})")]
    NoDataForPair(usize, usize),
    #[error("setting and outcome must use different bits of the code")]
    BadCodeMap,
}

/// Which bit of the two-bit code carries the analyzer setting and which the
/// detector that fired. Outcome bit 0 decodes to +1, bit 1 to -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeMap {
    setting_bit: u8,
    outcome_bit: u8,
}

impl Default for CodeMap {
    fn default() -> Self {
        Self {
            setting_bit: 1,
            outcome_bit: 0,
        }
    }
}

impl CodeMap {
    pub fn new(setting_bit: u8, outcome_bit: u8) -> Result<Self, ChshError> {
        if setting_bit > 1 || outcome_bit > 1 || setting_bit == outcome_bit {
            return Err(ChshError::BadCodeMap);
        }
        Ok(Self {
            setting_bit,
            outcome_bit,
        })
    }

    pub fn setting_bit(&self) -> u8 {
        self.setting_bit
    }

    pub fn outcome_bit(&self) -> u8 {
        self.outcome_bit
    }

    /// Splits a code into `(setting, outcome)` with outcome in {+1, -1}.
    pub fn decode(&self, code: u8) -> (usize, i8) {
        let setting = ((code >> self.setting_bit) & 1) as usize;
        let outcome = if (code >> self.outcome_bit) & 1 == 0 { 1 } else { -1 };
        (setting, outcome)
    }

    /// Inverse of [`CodeMap::decode`].
    pub fn encode(&self, setting: usize, outcome: i8) -> u8 {
        let o = u8::from(outcome < 0);
        ((setting as u8 & 1) << self.setting_bit) | (o << self.outcome_bit)
    }
}

fn outcome_index(o: i8) -> usize {
    usize::from(o < 0)
}

/// Counts indexed `[a_setting][b_setting][a_outcome][b_outcome]`, with
/// outcome index 0 for +1 and 1 for -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JointCounts {
    pub cells: [[[[u64; 2]; 2]; 2]; 2],
}

impl JointCounts {
    pub fn get(&self, a: usize, b: usize, a_out: i8, b_out: i8) -> u64 {
        self.cells[a][b][outcome_index(a_out)][outcome_index(b_out)]
    }

    pub fn add(&mut self, a: usize, b: usize, a_out: i8, b_out: i8) {
        self.cells[a][b][outcome_index(a_out)][outcome_index(b_out)] += 1;
    }

    pub fn pair_total(&self, a: usize, b: usize) -> u64 {
        self.cells[a][b].iter().flatten().sum()
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().flatten().flatten().sum()
    }

    /// Cellwise sum, for merging tallies of disjoint chunks.
    pub fn merge(&mut self, other: &JointCounts) {
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        self.cells[a][b][x][y] += other.cells[a][b][x][y];
                    }
                }
            }
        }
    }
}

/// Decodes every coincidence through `map` and tallies the joint outcomes.
pub fn tally(seq: &CoincidenceSequence, map: CodeMap) -> Result<JointCounts, ChshError> {
    if seq.is_empty() {
        return Err(ChshError::EmptySequence);
    }
    let mut counts = JointCounts::default();
    for ev in &seq.events {
        let (sa, oa) = map.decode(ev.code_a);
        let (sb, ob) = map.decode(ev.code_b);
        counts.add(sa, sb, oa, ob);
    }
    Ok(counts)
}

/// `E(a, b) = (N++ + N-- - N+- - N-+) / N` for one setting pair.
pub fn correlation(counts: &JointCounts, a: usize, b: usize) -> Result<f64, ChshError> {
    let n = counts.pair_total(a, b);
    if n == 0 {
        return Err(ChshError::NoDataForPair(a, b));
    }
    let same = counts.get(a, b, 1, 1) + counts.get(a, b, -1, -1);
    let diff = counts.get(a, b, 1, -1) + counts.get(a, b, -1, 1);
    Ok((same as f64 - diff as f64) / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignMode {
    /// Try the minus sign on each of the four terms; keep the largest |S|.
    #[default]
    Auto,
    /// `S = E00 - E01 + E10 + E11`.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshResult {
    /// `e[a][b]` is the correlation for Alice setting `a`, Bob setting `b`.
    pub e: [[f64; 2]; 2],
    /// Signed S under the chosen sign placement.
    pub s: f64,
    /// Index (row-major over `e`) of the term carrying the minus sign.
    pub minus_term: usize,
    pub pair_counts: [[u64; 2]; 2],
}

impl ChshResult {
    pub fn magnitude(&self) -> f64 {
        self.s.abs()
    }

    pub fn sign_combination(&self) -> &'static str {
        match self.minus_term {
            0 => "-E00+E01+E10+E11",
            1 => "E00-E01+E10+E11",
            2 => "E00+E01-E10+E11",
            _ => "E00+E01+E10-E11",
        }
    }
}

fn s_with_minus_on(e: &[[f64; 2]; 2], term: usize) -> f64 {
    let flat = [e[0][0], e[0][1], e[1][0], e[1][1]];
    flat.iter()
        .enumerate()
        .map(|(i, v)| if i == term { -v } else { *v })
        .sum()
}

pub fn chsh(counts: &JointCounts, mode: SignMode) -> Result<ChshResult, ChshError> {
    let mut e = [[0.0; 2]; 2];
    let mut pair_counts = [[0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            e[a][b] = correlation(counts, a, b)?;
            pair_counts[a][b] = counts.pair_total(a, b);
        }
    }
    let minus_term = match mode {
        SignMode::Fixed => 1,
        SignMode::Auto => (0..4)
            .max_by(|&x, &y| {
                s_with_minus_on(&e, x)
                    .abs()
                    .total_cmp(&s_with_minus_on(&e, y).abs())
                    // prefer the lower index on ties
                    .then(y.cmp(&x))
            })
            .unwrap_or(1),
    };
    Ok(ChshResult {
        e,
        s: s_with_minus_on(&e, minus_term),
        minus_term,
        pair_counts,
    })
}
