//! Algebraic core: QUBOs, posiforms, literals and bitstrings.
//!
//! All coefficients are `f64`. Instances produced by the planting pipeline
//! only ever hold integers, so every energy computed for them is exact and
//! can be compared with `==`.

mod bitstring;
mod brute;
mod compiled;
mod posiform;
mod qubo;

pub use bitstring::Bitstring;
pub use brute::{brute_force, brute_force_with_cap, BruteForce, DEFAULT_EXHAUSTIVE_CAP};
pub use compiled::CompiledQubo;
pub use posiform::Posiform;
pub use qubo::{NegativeCouplerRule, Qubo};

use std::fmt;

use serde::{Deserialize, Serialize};

/// A variable `x_i` or its complement `1 - x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub const fn pos(var: usize) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub const fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// The literal that is true when `x_var == value`.
    pub const fn with_value(var: usize, value: bool) -> Self {
        Literal {
            var,
            negated: !value,
        }
    }

    pub const fn complement(self) -> Self {
        Literal {
            var: self.var,
            negated: !self.negated,
        }
    }

    pub fn eval(self, x: &[bool]) -> bool {
        x[self.var] != self.negated
    }

    /// `z(x)` as 0 or 1.
    pub fn value(self, x: &[bool]) -> f64 {
        if self.eval(x) {
            1.0
        } else {
            0.0
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "~x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// Serializes integral values as JSON integers and everything else as floats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Coef(pub f64);

impl Serialize for Coef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match as_exact_int(self.0) {
            Some(i) => s.serialize_i64(i),
            None => s.serialize_f64(self.0),
        }
    }
}

impl<'de> Deserialize<'de> for Coef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Coef)
    }
}

pub(crate) fn as_exact_int(v: f64) -> Option<i64> {
    const LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53
    if v.is_finite() && v.fract() == 0.0 && v.abs() <= LIMIT {
        // -0.0 becomes 0
        Some(v as i64)
    } else {
        None
    }
}
