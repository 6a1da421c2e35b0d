//! Kernel for designing local-information utilities that turn a networked
//! finite game into an exact potential game, and for simulating logit-type
//! learning on the result.
//!
//! Conventions used throughout the crate:
//!
//! * players are numbered from 0;
//! * strategies of player `i` are `0..k_i`;
//! * a profile is flattened lexicographically with player 0 most significant,
//!   which is the index produced by the semi-tensor product of the strategies'
//!   basis vectors. Sub-profiles over a player subset use the same rule
//!   restricted to that subset (in ascending player order).
//!
//! File formats and the command-line front end use 1-based numbering and live
//! in the `potentialforge` crate.
#![no_std]

extern crate alloc;

mod error;

pub mod design;
pub mod game;
pub mod grid;
pub mod learning;
pub mod markov;
pub mod operator;
pub mod solver;
pub mod stp;

pub use error::{Error, Result};

/// Size caps applied before allocating large buffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of entries of a materialized dense matrix.
    pub max_materialize: usize,
    /// Maximum length of any dense vector (including `k`).
    pub max_vector: usize,
    /// Maximum number of profiles for explicit Markov chain construction.
    pub max_states: usize,
}

impl Limits {
    pub const DEFAULT_MAX_MATERIALIZE: usize = 1 << 24;
    pub const DEFAULT_MAX_VECTOR: usize = 1 << 31;
    pub const DEFAULT_MAX_STATES: usize = 4096;

    pub fn check_materialize(&self, rows: usize, cols: usize) -> Result<()> {
        match rows.checked_mul(cols) {
            Some(n) if n <= self.max_materialize => Ok(()),
            _ => Err(Error::CapExceeded {
                what: "materialized entries",
                requested: (rows as u128) * (cols as u128),
                cap: self.max_materialize,
            }),
        }
    }

    pub fn check_vector(&self, len: usize) -> Result<()> {
        if len <= self.max_vector {
            Ok(())
        } else {
            Err(Error::CapExceeded {
                what: "vector length",
                requested: len as u128,
                cap: self.max_vector,
            })
        }
    }
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_materialize: Self::DEFAULT_MAX_MATERIALIZE,
            max_vector: Self::DEFAULT_MAX_VECTOR,
            max_states: Self::DEFAULT_MAX_STATES,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}
