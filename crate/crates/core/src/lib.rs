//! Generation of QUBO instances with a unique planted optimum, and the
//! machinery to benchmark samplers on them.
//!
//! The pipeline: sample 2-SAT exclusion clauses over an allowed edge set
//! until the planted bitstring is the only satisfying assignment
//! ([`planting`]), turn each clause into a positive posiform term, and
//! multiply the posiform out into a QUBO ([`model`]). The QUBO's couplers are
//! a subset of the edge set, so hardware graphs from [`topology`] yield
//! hardware-native instances. [`samplers`] and [`metrics`] measure how often
//! classical heuristics find the planted optimum.

pub mod error;
pub mod io;
pub mod metrics;
pub mod model;
pub mod planting;
pub mod rng;
pub mod samplers;
pub mod topology;
pub mod twosat;

pub use error::{Error, Result};
pub use model::{Bitstring, Literal, Posiform, Qubo};
