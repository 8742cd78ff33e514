//! Conversions from event data to the bit strings that the complexity and
//! battery analyses consume. Every sequence remembers how it was produced.

use std::fmt;

use thiserror::Error;

use crate::coincidence::CoincidenceSequence;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("nothing to encode")]
    Empty,
    #[error("need at least {needed} times, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("times must be strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("code {0} is outside 0..=3")]
    BadCode(u8),
    #[error("character {0:?} is not a bit")]
    BadBit(char),
}

/// How a [`BinarySequence`] was derived.
#[derive(Debug, Clone, PartialEq)]
pub enum Encoding {
    /// Two bits per code, most significant first.
    Codes,
    /// Four bits per coincidence: Alice's code then Bob's.
    Joint,
    /// Inter-arrival times thresholded at their median.
    InterArrival { median: f64 },
    /// Supplied directly as bits.
    Raw,
    /// Produced by a reference generator.
    Reference(String),
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Encoding::Codes => f.write_str("codes2"),
            Encoding::Joint => f.write_str("joint4"),
            Encoding::InterArrival { median } => write!(f, "dt-median({median:.6e})"),
            Encoding::Raw => f.write_str("raw"),
            Encoding::Reference(kind) => write!(f, "reference:{kind}"),
        }
    }
}

/// A non-empty bit string, stored one bit per byte (values 0 or 1).
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySequence {
    bits: Vec<u8>,
    encoding: Encoding,
}

impl BinarySequence {
    pub fn new(bits: Vec<u8>, encoding: Encoding) -> Result<Self, EncodeError> {
        if bits.is_empty() {
            return Err(EncodeError::Empty);
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(EncodeError::BadBit(char::from(b'0' + b.min(9))));
        }
        Ok(Self { bits, encoding })
    }

    /// Parses `0`/`1` characters, ignoring whitespace.
    pub fn parse(text: &str) -> Result<Self, EncodeError> {
        let mut bits = Vec::with_capacity(text.len());
        for ch in text.chars() {
            match ch {
                '0' => bits.push(0),
                '1' => bits.push(1),
                c if c.is_whitespace() => {}
                c => return Err(EncodeError::BadBit(c)),
            }
        }
        Self::new(bits, Encoding::Raw)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn encoding(&self) -> &Encoding {
        &self.encoding
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| 1 - b).collect(),
            encoding: self.encoding.clone(),
        }
    }

    pub fn to_bit_string(&self) -> String {
        self.bits.iter().map(|&b| char::from(b'0' + b)).collect()
    }
}

fn push_code(bits: &mut Vec<u8>, code: u8) {
    bits.push((code >> 1) & 1);
    bits.push(code & 1);
}

pub fn encode_codes(codes: &[u8]) -> Result<BinarySequence, EncodeError> {
    if let Some(&c) = codes.iter().find(|&&c| c > 3) {
        return Err(EncodeError::BadCode(c));
    }
    let mut bits = Vec::with_capacity(codes.len() * 2);
    for &c in codes {
        push_code(&mut bits, c);
    }
    BinarySequence::new(bits, Encoding::Codes)
}

/// Splits a bit string back into two-bit codes; a trailing odd bit is dropped.
pub fn decode_codes(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(2).map(|p| (p[0] << 1) | p[1]).collect()
}

pub fn encode_joint(seq: &CoincidenceSequence) -> Result<BinarySequence, EncodeError> {
    let mut bits = Vec::with_capacity(seq.len() * 4);
    for ev in &seq.events {
        push_code(&mut bits, ev.code_a);
        push_code(&mut bits, ev.code_b);
    }
    BinarySequence::new(bits, Encoding::Joint)
}

/// One bit per inter-arrival gap: 1 when the gap exceeds the median gap.
pub fn binarize_times(times: &[f64]) -> Result<BinarySequence, EncodeError> {
    if times.len() < 3 {
        return Err(EncodeError::TooShort {
            needed: 3,
            got: times.len(),
        });
    }
    let deltas: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    if let Some(i) = deltas.iter().position(|&d| !(d > 0.0)) {
        return Err(EncodeError::NotIncreasing(i + 1));
    }
    let median = median(&deltas);
    let bits = deltas.iter().map(|&d| u8::from(d > median)).collect();
    BinarySequence::new(bits, Encoding::InterArrival { median })
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if values.len() % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}
