//! Classical baselines: simulated annealing, steepest descent, and the
//! exhaustive oracle, all reporting through [`SampleSet`].

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{brute_force_with_cap, Bitstring, CompiledQubo, Qubo, DEFAULT_EXHAUSTIVE_CAP};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub num_reads: usize,
    /// Sweeps per read (annealing only).
    pub sweeps: usize,
    /// `(beta_min, beta_max)`; derived from the instance when absent.
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        SamplerParams {
            num_reads: 800,
            sweeps: 1000,
            beta_range: None,
            seed: 0,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_reads == 0 || self.sweeps == 0 {
            return Err(Error::Config("reads and sweeps must be at least 1".into()));
        }
        if let Some((lo, hi)) = self.beta_range {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(Error::Config(format!(
                    "beta range ({lo}, {hi}) must satisfy 0 < beta_min < beta_max"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub read: usize,
    pub bits: Bitstring,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub sampler: String,
    pub num_vars: usize,
    pub records: Vec<SampleRecord>,
    /// Monotonic wall-clock time for the whole set.
    pub wall_time_s: f64,
    /// Single-variable energy-change evaluations performed; a deterministic
    /// cost measure.
    pub work: u64,
    pub params: SamplerParams,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn best_energy(&self) -> Option<f64> {
        self.records.iter().map(|r| r.energy).min_by(f64::total_cmp)
    }

    /// Checks every stored energy against a fresh evaluation.
    pub fn energies_consistent(&self, q: &Qubo) -> bool {
        self.records
            .iter()
            .all(|r| q.energy(&r.bits).is_ok_and(|e| e == r.energy))
    }
}

/// `count` inverse temperatures spaced geometrically from `lo` to `hi`.
pub fn geometric_schedule(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|k| lo * (ratio * k as f64).exp()).collect()
}

/// Hot end: the largest possible uphill move is accepted with probability
/// 1/2. Cold end: an uphill move of the smallest coefficient size is
/// accepted with probability `0.01 / n`.
pub fn default_beta_range(c: &CompiledQubo) -> (f64, f64) {
    let max_delta = c.max_flip_magnitude();
    let Some(min_delta) = c.min_nonzero_coef() else {
        return (0.1, 1.0);
    };
    let lo = std::f64::consts::LN_2 / max_delta;
    let hi = (c.num_vars() as f64 / 0.01).ln() / min_delta;
    (lo, hi.max(2.0 * lo))
}

/// Local fields `h_i = a_i + sum_j a_ij x_j` of a state.
fn fields(c: &CompiledQubo, x: &[bool]) -> Vec<f64> {
    (0..c.num_vars()).map(|i| c.local_field(i, x)).collect()
}

fn flip(c: &CompiledQubo, x: &mut [bool], h: &mut [f64], i: usize) {
    x[i] = !x[i];
    let s = if x[i] { 1.0 } else { -1.0 };
    for &(j, a) in c.neighbors(i) {
        h[j] += s * a;
    }
}

fn random_state(r: &mut Rng, n: usize) -> Vec<bool> {
    (0..n).map(|_| r.gen::<bool>()).collect()
}

fn read_rng(seed: u64, read: usize) -> Rng {
    rng::from_seed(rng::derive_seed(seed, read as u64))
}

/// Metropolis annealing with sequential sweeps over a geometric beta ladder.
/// Each read starts from its own random state and reports its final state.
pub fn simulated_annealing(q: &Qubo, p: &SamplerParams) -> Result<SampleSet> {
    p.validate()?;
    let start = Instant::now();
    let c = q.compile();
    let n = c.num_vars();
    let (lo, hi) = p.beta_range.unwrap_or_else(|| default_beta_range(&c));
    let schedule = geometric_schedule(lo, hi, p.sweeps);
    let records: Vec<SampleRecord> = (0..p.num_reads)
        .into_par_iter()
        .map(|read| {
            let mut r = read_rng(p.seed, read);
            let mut x = random_state(&mut r, n);
            let mut h = fields(&c, &x);
            let mut e = c.energy(&x);
            for &beta in &schedule {
                for i in 0..n {
                    let delta = if x[i] { -h[i] } else { h[i] };
                    if delta <= 0.0 || r.gen::<f64>() < (-beta * delta).exp() {
                        flip(&c, &mut x, &mut h, i);
                        e += delta;
                        if cfg!(debug_assertions) && n <= 100 {
                            let full = c.energy(&x);
                            debug_assert!((e - full).abs() <= 1e-9 * (1.0 + full.abs()));
                        }
                    }
                }
            }
            let bits = Bitstring::new(x);
            let energy = q.energy_unchecked(bits.bits());
            SampleRecord { read, bits, energy }
        })
        .collect();
    Ok(SampleSet {
        sampler: "sa".into(),
        num_vars: n,
        records,
        wall_time_s: start.elapsed().as_secs_f64(),
        work: (p.num_reads * p.sweeps * n) as u64,
        params: SamplerParams {
            beta_range: Some((lo, hi)),
            ..p.clone()
        },
    })
}

/// Greedy descent from `x`: flip the bit with the largest energy decrease
/// (lowest index on ties) until no flip decreases the energy. Returns the
/// final state, the energy after each step (starting energy first), and
/// the number of delta evaluations.
pub fn descend(c: &CompiledQubo, mut x: Vec<bool>) -> (Vec<bool>, Vec<f64>, u64) {
    let n = c.num_vars();
    let mut h = fields(c, &x);
    let mut e = c.energy(&x);
    let mut trajectory = vec![e];
    let mut work = 0u64;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            let delta = if x[i] { -h[i] } else { h[i] };
            if delta < 0.0 && best.is_none_or(|(_, d)| delta < d) {
                best = Some((i, delta));
            }
        }
        work += n as u64;
        let Some((i, delta)) = best else { break };
        flip(c, &mut x, &mut h, i);
        e += delta;
        trajectory.push(e);
    }
    (x, trajectory, work)
}

pub fn steepest_descent(q: &Qubo, p: &SamplerParams) -> Result<SampleSet> {
    p.validate()?;
    let start = Instant::now();
    let c = q.compile();
    let n = c.num_vars();
    let runs: Vec<(SampleRecord, u64)> = (0..p.num_reads)
        .into_par_iter()
        .map(|read| {
            let mut r = read_rng(p.seed, read);
            let (x, _, work) = descend(&c, random_state(&mut r, n));
            let bits = Bitstring::new(x);
            let energy = q.energy_unchecked(bits.bits());
            (SampleRecord { read, bits, energy }, work)
        })
        .collect();
    let work = runs.iter().map(|(_, w)| w).sum();
    Ok(SampleSet {
        sampler: "greedy".into(),
        num_vars: n,
        records: runs.into_iter().map(|(rec, _)| rec).collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
        work,
        params: SamplerParams {
            beta_range: None,
            ..p.clone()
        },
    })
}

/// One record per exact minimizer.
pub fn exhaustive(q: &Qubo) -> Result<SampleSet> {
    exhaustive_with_cap(q, DEFAULT_EXHAUSTIVE_CAP)
}

pub fn exhaustive_with_cap(q: &Qubo, cap: usize) -> Result<SampleSet> {
    let start = Instant::now();
    let bf = brute_force_with_cap(q, cap)?;
    let records = bf
        .minimizers
        .into_iter()
        .enumerate()
        .map(|(read, bits)| SampleRecord {
            read,
            bits,
            energy: bf.min_energy,
        })
        .collect::<Vec<_>>();
    Ok(SampleSet {
        sampler: "exhaustive".into(),
        num_vars: q.num_vars(),
        params: SamplerParams {
            num_reads: records.len(),
            sweeps: 1,
            beta_range: None,
            seed: 0,
        },
        records,
        wall_time_s: start.elapsed().as_secs_f64(),
        work: 1u64 << q.num_vars(),
    })
}
