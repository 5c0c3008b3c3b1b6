//! Posiform planting: QUBOs whose unique global minimum is a chosen
//! bitstring.
//!
//! Clauses that forbid one assignment of a variable pair, never the planted
//! one, are sampled until the planted bitstring is the only model of the
//! 2-SAT formula. Each clause `(z OR z')` becomes the posiform term
//! `b ~z ~z'`, which vanishes exactly when the clause holds, so the posiform
//! is zero at the planted bitstring and strictly positive everywhere else.
//! Multiplying the posiform out gives the QUBO; its couplers are exactly the
//! sampled pairs.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::model::{brute_force, Bitstring, Literal, Posiform, Qubo, DEFAULT_EXHAUSTIVE_CAP};
use crate::rng::{self, Rng};
use crate::topology::EdgeSet;
use crate::twosat::{Clause, TwoSatFormula, UniquenessProbe};

pub const GENERATOR_VERSION: &str = concat!("posiform ", env!("CARGO_PKG_VERSION"));

pub const DEFAULT_COEFFICIENTS: [f64; 2] = [1.0, 2.0];

#[derive(Debug, Clone)]
pub struct PlantingConfig {
    pub planted: Bitstring,
    /// Pairs clauses may be placed on; `None` allows every pair.
    pub edge_set: Option<EdgeSet>,
    /// Clauses added before the first uniqueness check. Defaults to the
    /// number of variables.
    pub batch_size: Option<usize>,
    pub coefficient_pool: Vec<f64>,
    pub seed: u64,
    /// Defaults to `100 n`.
    pub max_clauses: Option<usize>,
}

impl PlantingConfig {
    pub fn new(planted: Bitstring, seed: u64) -> Self {
        PlantingConfig {
            planted,
            edge_set: None,
            batch_size: None,
            coefficient_pool: DEFAULT_COEFFICIENTS.to_vec(),
            seed,
            max_clauses: None,
        }
    }

    pub fn with_edge_set(mut self, e: EdgeSet) -> Self {
        self.edge_set = Some(e);
        self
    }

    pub fn with_batch_size(mut self, b: usize) -> Self {
        self.batch_size = Some(b);
        self
    }

    pub fn with_coefficients(mut self, pool: Vec<f64>) -> Self {
        self.coefficient_pool = pool;
        self
    }

    pub fn with_max_clauses(mut self, max: usize) -> Self {
        self.max_clauses = Some(max);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.planted.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size.unwrap_or(self.num_vars()).max(1)
    }

    pub fn max_clauses(&self) -> usize {
        self.max_clauses.unwrap_or(100 * self.num_vars())
    }

    /// Checks everything [`plant`] checks before sampling.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::Config("planting needs at least one variable".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if self.coefficient_pool.is_empty() {
            return Err(Error::Config("coefficient pool is empty".into()));
        }
        if let Some(c) = self
            .coefficient_pool
            .iter()
            .find(|c| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::Config(format!(
                "posiform coefficient {c} is not strictly positive"
            )));
        }
        if let Some(e) = &self.edge_set {
            if e.num_vars() != n {
                return Err(Error::Config(format!(
                    "edge set has {} nodes but {n} variables are planted",
                    e.num_vars()
                )));
            }
            let uncovered = e.isolated_nodes().len() + e.inactive().len();
            if n > 1 && uncovered > 0 {
                return Err(Error::Config(format!(
                    "edge set {:?} leaves {uncovered} of {n} variables without an edge",
                    e.label()
                )));
            }
        }
        Ok(())
    }
}

/// Uniformly random bitstring from its own seed.
pub fn random_planted(n: usize, seed: u64) -> Bitstring {
    let mut r = rng::from_seed(seed);
    Bitstring::new((0..n).map(|_| r.gen::<bool>()).collect())
}

#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub qubo: Qubo,
    pub posiform: Posiform,
    pub formula: TwoSatFormula,
    pub planted: Bitstring,
    /// `qubo` evaluated at `planted`, offset included. Always zero for
    /// instances built here since the posiform carries no constant.
    pub planted_energy: f64,
    pub seed: u64,
    pub batch_size: usize,
    pub coefficient_pool: Vec<f64>,
    pub max_clauses: usize,
    pub edge_set_label: Option<String>,
    pub generator_version: String,
}

impl PlantedInstance {
    pub fn num_vars(&self) -> usize {
        self.planted.len()
    }

    pub fn clause_count(&self) -> usize {
        self.formula.len()
    }
}

/// The clause that rules out `(x_i, x_j) = excluded`:
///
/// | excluded | clause        |
/// |----------|---------------|
/// | (0, 0)   | `x_i OR x_j`  |
/// | (0, 1)   | `x_i OR ~x_j` |
/// | (1, 0)   | `~x_i OR x_j` |
/// | (1, 1)   | `~x_i OR ~x_j`|
pub fn exclude_clause(
    i: usize,
    j: usize,
    planted: (bool, bool),
    excluded: (bool, bool),
) -> Result<Clause> {
    if i == j {
        return Err(Error::Contract(format!("exclusion clause on a single variable {i}")));
    }
    if excluded == planted {
        return Err(Error::Contract(format!(
            "excluding the planted assignment {:?} of ({i}, {j})",
            (u8::from(planted.0), u8::from(planted.1))
        )));
    }
    Ok(Clause::new(
        Literal {
            var: i,
            negated: excluded.0,
        },
        Literal {
            var: j,
            negated: excluded.1,
        },
    ))
}

/// Maps each clause `(z OR z')` to `b ~z ~z'` (a unit clause `(z OR z)` to
/// `b ~z`), drawing `b` from `coef` per clause occurrence.
pub fn clauses_to_posiform(
    formula: &TwoSatFormula,
    mut coef: impl FnMut() -> f64,
) -> Result<Posiform> {
    let mut p = Posiform::new(formula.num_vars());
    for c in formula.clauses() {
        let b = coef();
        if c.first.var == c.second.var {
            if c.first != c.second {
                // tautology, zero everywhere
                continue;
            }
            p.add_linear(c.first.complement(), b)?;
        } else {
            p.add_quadratic(c.first.complement(), c.second.complement(), b)?;
        }
    }
    Ok(p)
}

enum PairSource<'a> {
    All(usize),
    Edges(Vec<(usize, usize)>, &'a EdgeSet),
}

impl PairSource<'_> {
    fn draw(&self, r: &mut Rng) -> (usize, usize) {
        match self {
            PairSource::All(n) => {
                let i = r.gen_range(0..*n);
                let mut j = r.gen_range(0..*n - 1);
                if j >= i {
                    j += 1;
                }
                (i.min(j), i.max(j))
            }
            PairSource::Edges(edges, _) => edges[r.gen_range(0..edges.len())],
        }
    }
}

/// Runs the planting loop. Deterministic for a fixed configuration.
///
/// The first uniqueness check happens after `batch_size` clauses, later ones
/// every `max(batch_size / 10, 1)` clauses.
pub fn plant(cfg: &PlantingConfig) -> Result<PlantedInstance> {
    cfg.validate()?;
    let n = cfg.num_vars();
    let x = &cfg.planted;
    let mut r = rng::from_seed(cfg.seed);
    let mut formula = TwoSatFormula::new(n);

    if n == 1 {
        // no pairs exist; pin the lone variable with a unit clause
        formula.push(Clause::unit(Literal::with_value(0, x.get(0))))?;
    } else {
        let source = match &cfg.edge_set {
            Some(e) => PairSource::Edges(e.edges().collect(), e),
            None => PairSource::All(n),
        };
        if let PairSource::Edges(edges, e) = &source {
            if edges.is_empty() {
                return Err(Error::Config(format!("edge set {:?} has no edges", e.label())));
            }
        }
        let max = cfg.max_clauses();
        let batch = cfg.batch_size();
        let step = (batch / 10).max(1);
        let mut next_check = batch;
        let mut probe = UniquenessProbe::new(x.clone());
        let mut unique = false;
        while formula.len() < max {
            let (i, j) = source.draw(&mut r);
            let planted = (x.get(i), x.get(j));
            let k = r.gen_range(0..3);
            let excluded = [(false, false), (false, true), (true, false), (true, true)]
                .into_iter()
                .filter(|&t| t != planted)
                .nth(k)
                .expect("three tuples differ from the planted one");
            let clause = exclude_clause(i, j, planted, excluded)?;
            assert!(clause.is_satisfied_by(x.bits()));
            probe.add_clause(clause);
            formula.push(clause)?;
            if formula.len() == next_check {
                if probe.is_unique() {
                    unique = true;
                    break;
                }
                next_check += step;
            }
        }
        if !unique && !probe.is_unique() {
            return Err(Error::SparseGraph {
                clauses: formula.len(),
            });
        }
    }

    let pool = &cfg.coefficient_pool;
    let posiform = clauses_to_posiform(&formula, || pool[r.gen_range(0..pool.len())])?;
    let qubo = posiform.to_qubo();
    let planted_energy = qubo.energy(x)?;
    debug_assert_eq!(posiform.value(x)?, 0.0);

    Ok(PlantedInstance {
        qubo,
        posiform,
        formula,
        planted: x.clone(),
        planted_energy,
        seed: cfg.seed,
        batch_size: cfg.batch_size(),
        coefficient_pool: pool.clone(),
        max_clauses: cfg.max_clauses(),
        edge_set_label: cfg.edge_set.as_ref().map(|e| e.label().to_owned()),
        generator_version: GENERATOR_VERSION.to_owned(),
    })
}

/// Result of [`combine`].
#[derive(Debug, Clone)]
pub struct Combined {
    pub qubo: Qubo,
    /// Whether `q1` was confirmed by exhaustive search to attain its minimum
    /// at the planted bitstring. Above the exhaustive cap this is trusted,
    /// not checked.
    pub precondition_verified: bool,
}

/// `alpha1 q1 + alpha2 q2`, where `q2` is a planted instance and `q1`
/// attains its (possibly degenerate) minimum at the same bitstring. The
/// planted bitstring is then the unique minimizer of the combination.
pub fn combine(alpha1: f64, q1: &Qubo, alpha2: f64, q2: &PlantedInstance) -> Result<Combined> {
    for a in [alpha1, alpha2] {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Range(format!("multiplier {a} must be strictly positive")));
        }
    }
    q2.planted.check_len(q1.num_vars())?;
    let precondition_verified = if q1.num_vars() <= DEFAULT_EXHAUSTIVE_CAP {
        let bf = brute_force(q1)?;
        let at_planted = q1.energy(&q2.planted)?;
        if at_planted != bf.min_energy {
            return Err(Error::Contract(format!(
                "q1 has energy {at_planted} at the planted bitstring but its minimum is {}",
                bf.min_energy
            )));
        }
        true
    } else {
        false
    };
    let qubo = q1.linear_combination(alpha1, alpha2, &q2.qubo)?;
    Ok(Combined {
        qubo,
        precondition_verified,
    })
}
