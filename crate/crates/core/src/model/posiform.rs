use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Bitstring, Coef, Literal, Qubo};
use crate::error::{Error, Result};

/// A quadratic form over literals with strictly positive coefficients plus
/// a signed offset:
///
/// `sum_z b_z z + sum_{z,z'} b_zz' z z' + offset`.
///
/// Quadratic keys are ordered by variable index and never pair a variable
/// with itself or its complement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PosiformRepr", try_from = "PosiformRepr")]
pub struct Posiform {
    num_vars: usize,
    linear: BTreeMap<Literal, f64>,
    quadratic: BTreeMap<(Literal, Literal), f64>,
    offset: f64,
}

fn check_positive(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::Range(format!(
            "posiform coefficient {c} must be finite and strictly positive"
        )))
    }
}

impl Posiform {
    pub fn new(num_vars: usize) -> Self {
        Posiform {
            num_vars,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    fn check_literal(&self, z: Literal) -> Result<()> {
        if z.var < self.num_vars {
            Ok(())
        } else {
            Err(Error::Range(format!(
                "literal {z} outside 0..{}",
                self.num_vars
            )))
        }
    }

    pub fn add_linear(&mut self, z: Literal, b: f64) -> Result<()> {
        self.check_literal(z)?;
        check_positive(b)?;
        *self.linear.entry(z).or_insert(0.0) += b;
        Ok(())
    }

    pub fn add_quadratic(&mut self, z: Literal, w: Literal, b: f64) -> Result<()> {
        self.check_literal(z)?;
        self.check_literal(w)?;
        check_positive(b)?;
        if z.var == w.var {
            return Err(Error::Range(format!(
                "quadratic posiform term {z}*{w} must involve two distinct variables"
            )));
        }
        let key = if z.var < w.var { (z, w) } else { (w, z) };
        *self.quadratic.entry(key).or_insert(0.0) += b;
        Ok(())
    }

    pub fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn linear(&self) -> &BTreeMap<Literal, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(Literal, Literal), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_empty(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty()
    }

    /// `P(x)`, offset included.
    pub fn value(&self, x: &Bitstring) -> Result<f64> {
        x.check_len(self.num_vars)?;
        let x = x.bits();
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(z, _)| z.eval(x))
            .map(|(_, &b)| b)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|((z, w), _)| z.eval(x) && w.eval(x))
            .map(|(_, &b)| b)
            .sum();
        Ok(lin + quad + self.offset)
    }

    /// Multiplies out every complement `~x_i = 1 - x_i`.
    pub fn to_qubo(&self) -> Qubo {
        let mut q = Qubo::new(self.num_vars);
        // a literal is c + s*x with (c, s) = (0, 1) or (1, -1)
        let affine = |z: Literal| if z.negated { (1.0, -1.0) } else { (0.0, 1.0) };
        let mut offset = self.offset;
        for (&z, &b) in &self.linear {
            let (c, s) = affine(z);
            offset += b * c;
            q.add_linear(z.var, b * s).expect("in range");
        }
        for (&(z, w), &b) in &self.quadratic {
            let (cz, sz) = affine(z);
            let (cw, sw) = affine(w);
            offset += b * cz * cw;
            q.add_linear(w.var, b * cz * sw).expect("in range");
            q.add_linear(z.var, b * cw * sz).expect("in range");
            q.add_quadratic(z.var, w.var, b * sz * sw)
                .expect("in range");
        }
        q.add_offset(offset).expect("finite");
        q
    }
}

#[derive(Serialize, Deserialize)]
struct PosiformRepr {
    num_vars: usize,
    offset: Coef,
    linear: Vec<(Literal, Coef)>,
    quadratic: Vec<(Literal, Literal, Coef)>,
}

impl From<Posiform> for PosiformRepr {
    fn from(p: Posiform) -> Self {
        PosiformRepr {
            num_vars: p.num_vars,
            offset: Coef(p.offset),
            linear: p.linear.into_iter().map(|(z, b)| (z, Coef(b))).collect(),
            quadratic: p
                .quadratic
                .into_iter()
                .map(|((z, w), b)| (z, w, Coef(b)))
                .collect(),
        }
    }
}

impl TryFrom<PosiformRepr> for Posiform {
    type Error = Error;

    fn try_from(r: PosiformRepr) -> Result<Self> {
        let mut p = Posiform::new(r.num_vars);
        for (z, b) in r.linear {
            p.add_linear(z, b.0)?;
        }
        for (z, w, b) in r.quadratic {
            p.add_quadratic(z, w, b.0)?;
        }
        p.set_offset(r.offset.0);
        Ok(p)
    }
}
