use std::collections::BTreeMap;
use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Bitstring, Coef, CompiledQubo, Literal, Posiform};
use crate::error::{Error, Result};
use crate::rng;

/// `sum_i a_i x_i + sum_{i<j} a_ij x_i x_j + offset` over binary `x`.
///
/// Entries are kept sparse: zeros are never stored and pairs are keyed
/// `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "QuboRepr", try_from = "QuboRepr")]
pub struct Qubo {
    num_vars: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

/// Which variable to complement when rewriting a negative coupler
/// `a x_i x_j` (with `i < j`) into posiform terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeCouplerRule {
    /// `a + (-a) ~x_j + (-a) ~x_i x_j`.
    #[default]
    ComplementLower,
    /// Pick the complemented variable per term from a seeded stream.
    Seeded(u64),
}

fn check_coef(c: f64) -> Result<()> {
    if c.is_finite() {
        Ok(())
    } else {
        Err(Error::Range(format!("coefficient {c} is not finite")))
    }
}

pub(super) fn accumulate<K: Ord>(map: &mut BTreeMap<K, f64>, key: K, c: f64) {
    use std::collections::btree_map::Entry;
    if c == 0.0 {
        return;
    }
    match map.entry(key) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if *o.get() == 0.0 {
                o.remove();
            }
        }
    }
}

impl Qubo {
    pub fn new(num_vars: usize) -> Self {
        Qubo {
            num_vars,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    /// Builds a QUBO from term lists, merging duplicates.
    pub fn from_terms(
        num_vars: usize,
        linear: impl IntoIterator<Item = (usize, f64)>,
        quadratic: impl IntoIterator<Item = (usize, usize, f64)>,
        offset: f64,
    ) -> Result<Self> {
        let mut q = Qubo::new(num_vars);
        for (i, c) in linear {
            q.add_linear(i, c)?;
        }
        for (i, j, c) in quadratic {
            q.add_quadratic(i, j, c)?;
        }
        q.add_offset(offset)?;
        Ok(q)
    }

    fn check_var(&self, i: usize) -> Result<()> {
        if i < self.num_vars {
            Ok(())
        } else {
            Err(Error::Range(format!(
                "variable {i} outside 0..{}",
                self.num_vars
            )))
        }
    }

    pub fn add_linear(&mut self, i: usize, c: f64) -> Result<()> {
        self.check_var(i)?;
        check_coef(c)?;
        accumulate(&mut self.linear, i, c);
        Ok(())
    }

    /// Adds `c x_i x_j`. A diagonal pair folds into the linear term since
    /// `x_i^2 = x_i`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) -> Result<()> {
        self.check_var(i)?;
        self.check_var(j)?;
        check_coef(c)?;
        if i == j {
            accumulate(&mut self.linear, i, c);
        } else {
            accumulate(&mut self.quadratic, (i.min(j), i.max(j)), c);
        }
        Ok(())
    }

    pub fn add_offset(&mut self, c: f64) -> Result<()> {
        check_coef(c)?;
        self.offset += c;
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn linear_coef(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic_coef(&self, i: usize, j: usize) -> f64 {
        self.quadratic
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.linear.is_empty() && self.quadratic.is_empty() && self.offset == 0.0
    }

    pub fn without_offset(&self) -> Qubo {
        Qubo {
            offset: 0.0,
            ..self.clone()
        }
    }

    /// `Q(x)`, offset included.
    pub fn energy(&self, x: &Bitstring) -> Result<f64> {
        x.check_len(self.num_vars)?;
        Ok(self.energy_unchecked(x.bits()))
    }

    pub(crate) fn energy_unchecked(&self, x: &[bool]) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(&i, _)| x[i])
            .map(|(_, &a)| a)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x[i] && x[j])
            .map(|(_, &a)| a)
            .sum();
        lin + quad + self.offset
    }

    /// Coefficient-wise `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, beta: f64, other: &Qubo) -> Result<Qubo> {
        if other.num_vars != self.num_vars {
            return Err(Error::Dimension {
                expected: self.num_vars,
                actual: other.num_vars,
            });
        }
        let mut out = Qubo::new(self.num_vars);
        for (scale, q) in [(alpha, self), (beta, other)] {
            for (&i, &a) in &q.linear {
                out.add_linear(i, scale * a)?;
            }
            for (&(i, j), &a) in &q.quadratic {
                out.add_quadratic(i, j, scale * a)?;
            }
            out.add_offset(scale * q.offset)?;
        }
        Ok(out)
    }

    /// The largest coefficient magnitude; zero for an empty QUBO.
    pub fn max_abs_coef(&self) -> f64 {
        self.linear
            .values()
            .chain(self.quadratic.values())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rewrites into a posiform with the same value everywhere. Constants
    /// produced by the rewriting land in the posiform offset.
    pub fn to_posiform(&self, rule: NegativeCouplerRule) -> Posiform {
        let mut p = Posiform::new(self.num_vars);
        let mut offset = self.offset;
        for (&i, &a) in &self.linear {
            if a > 0.0 {
                p.add_linear(Literal::pos(i), a).expect("positive, in range");
            } else {
                offset += a;
                p.add_linear(Literal::neg(i), -a).expect("positive, in range");
            }
        }
        let mut choice = match rule {
            NegativeCouplerRule::ComplementLower => None,
            NegativeCouplerRule::Seeded(seed) => Some(rng::from_seed(seed)),
        };
        for (&(i, j), &a) in &self.quadratic {
            if a > 0.0 {
                p.add_quadratic(Literal::pos(i), Literal::pos(j), a)
                    .expect("distinct variables");
                continue;
            }
            let complement_lower = match choice.as_mut() {
                None => true,
                Some(r) => r.gen::<bool>(),
            };
            // a x_i x_j = a + (-a) ~x_c + (-a) ~x_k x_c   with {k, c} = {i, j}
            let (k, c) = if complement_lower { (i, j) } else { (j, i) };
            offset += a;
            p.add_linear(Literal::neg(c), -a).expect("positive, in range");
            p.add_quadratic(Literal::neg(k), Literal::pos(c), -a)
                .expect("distinct variables");
        }
        p.set_offset(offset);
        p
    }

    pub fn compile(&self) -> CompiledQubo {
        CompiledQubo::new(self)
    }
}

#[derive(Serialize, Deserialize)]
struct QuboRepr {
    num_vars: usize,
    offset: Coef,
    linear: Vec<(usize, Coef)>,
    quadratic: Vec<(usize, usize, Coef)>,
}

/// Polynomial form with 0-based variables, e.g. `x1 + x2 - 2 x0 x2 + 1`.
impl fmt::Display for Qubo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .linear
            .iter()
            .map(|(i, &c)| (c, format!("x{i}")))
            .chain(self.quadratic.iter().map(|((i, j), &c)| (c, format!("x{i} x{j}"))))
            .chain((self.offset != 0.0).then(|| (self.offset, String::new())));
        let mut first = true;
        for (c, vars) in terms {
            let sign = match (first, c < 0.0) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            first = false;
            let mag = c.abs();
            match (vars.is_empty(), mag == 1.0) {
                (true, _) => write!(f, "{sign}{mag}")?,
                (false, true) => write!(f, "{sign}{vars}")?,
                (false, false) => write!(f, "{sign}{mag} {vars}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl From<Qubo> for QuboRepr {
    fn from(q: Qubo) -> Self {
        QuboRepr {
            num_vars: q.num_vars,
            offset: Coef(q.offset),
            linear: q.linear.into_iter().map(|(i, a)| (i, Coef(a))).collect(),
            quadratic: q
                .quadratic
                .into_iter()
                .map(|((i, j), a)| (i, j, Coef(a)))
                .collect(),
        }
    }
}

impl TryFrom<QuboRepr> for Qubo {
    type Error = Error;

    fn try_from(r: QuboRepr) -> Result<Self> {
        Qubo::from_terms(
            r.num_vars,
            r.linear.into_iter().map(|(i, a)| (i, a.0)),
            r.quadratic.into_iter().map(|(i, j, a)| (i, j, a.0)),
            r.offset.0,
        )
    }
}
