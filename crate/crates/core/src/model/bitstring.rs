use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense assignment `x = (x_0, ..., x_{n-1})`.
///
/// Ordering is lexicographic with `x_0` most significant, which is the order
/// the exhaustive oracle reports minimizers in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bitstring(Vec<bool>);

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Bitstring(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Bitstring(vec![false; n])
    }

    /// Bit `i` of the result is bit `i` of `mask`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Bitstring((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected,
                actual: self.len(),
            })
        }
    }

    /// Hex encoding, four bits per digit with `x_0` as the high bit of the
    /// first digit. The tail is zero-padded.
    pub fn to_hex(&self) -> String {
        self.0
            .chunks(4)
            .map(|chunk| {
                let nibble = chunk
                    .iter()
                    .enumerate()
                    .fold(0u32, |acc, (k, &b)| acc | (u32::from(b) << (3 - k)));
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(s: &str, n: usize) -> Result<Self> {
        if s.len() != n.div_ceil(4) {
            return Err(Error::Parse(format!(
                "hex bitstring {s:?} has wrong length for {n} bits"
            )));
        }
        let mut bits = Vec::with_capacity(s.len() * 4);
        for c in s.chars() {
            let d = c
                .to_digit(16)
                .ok_or_else(|| Error::Parse(format!("invalid hex digit {c:?}")))?;
            bits.extend((0..4).map(|k| d >> (3 - k) & 1 == 1));
        }
        if bits[n..].iter().any(|&b| b) {
            return Err(Error::Parse(format!("hex bitstring {s:?} has nonzero padding")));
        }
        bits.truncate(n);
        Ok(Bitstring(bits))
    }
}

impl From<Vec<bool>> for Bitstring {
    fn from(bits: Vec<bool>) -> Self {
        Bitstring(bits)
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    /// Parses a string of `0`/`1` characters, `x_0` first.
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("invalid bit {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bitstring)
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for Bitstring {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|&b| u8::from(b)))
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<u8>::deserialize(d)?;
        raw.into_iter()
            .map(|b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(serde::de::Error::custom(format!("bit value {other} not in {{0,1}}"))),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Bitstring)
    }
}
