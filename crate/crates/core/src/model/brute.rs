use rayon::prelude::*;

use super::{Bitstring, CompiledQubo, Qubo};
use crate::error::{Error, Result};

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 24;

/// Exact minimum of a QUBO and every bitstring attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce {
    pub min_energy: f64,
    /// Lexicographically sorted.
    pub minimizers: Vec<Bitstring>,
}

pub fn brute_force(q: &Qubo) -> Result<BruteForce> {
    brute_force_with_cap(q, DEFAULT_EXHAUSTIVE_CAP)
}

/// Enumerates all `2^n` assignments in Gray-code order. The range is split
/// over the top bits and scanned in parallel; the result does not depend on
/// the split.
pub fn brute_force_with_cap(q: &Qubo, cap: usize) -> Result<BruteForce> {
    let n = q.num_vars();
    if n > cap || n >= 64 {
        return Err(Error::SizeCap {
            what: "brute force",
            n,
            cap: cap.min(63),
        });
    }
    let c = q.compile();
    let high = if n > 14 { 6 } else { 0 };
    let low = n - high;
    // Gray-code accumulation can drift for non-integer data; candidates are
    // collected with slack and re-evaluated exactly below.
    let slack = 1e-9 * (1.0 + c.max_flip_magnitude() * n as f64);

    let candidates: Vec<u64> = (0..1u64 << high)
        .into_par_iter()
        .map(|h| scan_chunk(&c, low, h, slack))
        .reduce(
            || (f64::INFINITY, Vec::new()),
            |a, b| {
                let best = a.0.min(b.0);
                let keep = |(e, v): (f64, Vec<u64>)| if e <= best + slack { v } else { Vec::new() };
                let mut merged = keep(a);
                merged.extend(keep(b));
                (best, merged)
            },
        )
        .1;

    let mut scored: Vec<(f64, Bitstring)> = candidates
        .into_iter()
        .map(|m| {
            let x = Bitstring::from_mask(m, n);
            (q.energy_unchecked(x.bits()), x)
        })
        .collect();
    let min_energy = scored
        .iter()
        .map(|(e, _)| *e)
        .min_by(f64::total_cmp)
        .expect("at least one assignment");
    scored.retain(|(e, _)| *e == min_energy);
    let mut minimizers: Vec<Bitstring> = scored.into_iter().map(|(_, x)| x).collect();
    minimizers.sort();
    Ok(BruteForce {
        min_energy,
        minimizers,
    })
}

/// Scans the `2^low` assignments whose top bits equal `high_bits`.
fn scan_chunk(c: &CompiledQubo, low: usize, high_bits: u64, slack: f64) -> (f64, Vec<u64>) {
    let n = c.num_vars();
    let mut x: Vec<bool> = (0..n)
        .map(|i| i >= low && (high_bits >> (i - low)) & 1 == 1)
        .collect();
    let mut mask = high_bits << low;
    let mut e = c.energy(&x);
    let mut best = e;
    let mut cands = vec![mask];
    for step in 1u64..(1u64 << low) {
        let i = step.trailing_zeros() as usize;
        e += c.flip_delta(i, &x);
        x[i] = !x[i];
        mask ^= 1 << i;
        if e < best - slack {
            best = e;
            cands.clear();
            cands.push(mask);
        } else if e <= best + slack {
            best = best.min(e);
            cands.push(mask);
        }
    }
    (best, cands)
}
