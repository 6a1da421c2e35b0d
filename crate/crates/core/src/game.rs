//! Networked finite games and real-valued functions on profile spaces.

use alloc::vec;
use alloc::vec::Vec;

use crate::operator::FactorOperator;
use crate::stp::{Dims, Profile};
use crate::{Error, Limits, Result};

/// Default absolute tolerance for potential verification.
pub const POTENTIAL_TOL: f64 = 1e-8;

/// A function on the sub-profiles of the players in `scope`, stored as its
/// structure vector: `values[m]` is the value at the sub-profile with index `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameFunction {
    scope: Vec<usize>,
    values: Vec<f64>,
}

impl GameFunction {
    pub fn new(dims: &Dims, mut scope: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        scope.sort_unstable();
        if scope.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidScope("duplicate player"));
        }
        for &j in &scope {
            dims.check_player(j)?;
        }
        let expected = dims.scoped_total(&scope);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self { scope, values })
    }

    /// Full-scope function from a length-`k` structure vector.
    pub fn full(dims: &Dims, values: Vec<f64>) -> Result<Self> {
        Self::new(dims, (0..dims.players()).collect(), values)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            scope: Vec::new(),
            values: vec![value],
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn eval(&self, dims: &Dims, profile: &Profile) -> Result<f64> {
        dims.check_profile(profile)?;
        Ok(self.eval_unchecked(dims, profile.strategies()))
    }

    pub(crate) fn eval_unchecked(&self, dims: &Dims, strategies: &[usize]) -> f64 {
        self.values[dims.encode_scoped(&self.scope, strategies)]
    }

    /// The full-profile structure vector `V·Γ_scope`, as a length-`k` vector.
    pub fn lift(&self, dims: &Dims, limits: &Limits) -> Result<Vec<f64>> {
        limits.check_vector(dims.total())?;
        FactorOperator::drawing(dims, &self.scope)?.apply_transpose(&self.values)
    }
}

/// Outcome of a scope or potential check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub ok: bool,
    /// Largest spread found within a class of profiles that should share a value.
    pub max: f64,
}

/// Checks that `full` (length `k`) depends only on the players in `scope`:
/// within every class of profiles agreeing on `scope`, values spread by at most
/// `tol`.
pub fn scope_check(dims: &Dims, full: &[f64], scope: &[usize], tol: f64) -> Result<Deviation> {
    if full.len() != dims.total() {
        return Err(Error::LengthMismatch {
            expected: dims.total(),
            found: full.len(),
        });
    }
    for &j in scope {
        dims.check_player(j)?;
    }
    let classes = dims.scoped_total(scope);
    let mut lo = vec![f64::INFINITY; classes];
    let mut hi = vec![f64::NEG_INFINITY; classes];
    let mut strategies = vec![0; dims.players()];
    for (idx, &v) in full.iter().enumerate() {
        dims.decode_into(idx, &mut strategies);
        let c = dims.encode_scoped(scope, &strategies);
        lo[c] = lo[c].min(v);
        hi[c] = hi[c].max(v);
    }
    let max = lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max);
    Ok(Deviation {
        ok: max <= tol,
        max,
    })
}

/// A finite game on a communication graph. Player `i` observes `U(i)` and its
/// utility may depend only on `N_i = U(i) ∪ {i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkedGame {
    dims: Dims,
    neighbors: Vec<Vec<usize>>,
    closed: Vec<Vec<usize>>,
    utilities: Option<Vec<GameFunction>>,
}

impl NetworkedGame {
    pub fn new(dims: Dims, neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = dims.players();
        if neighbors.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: neighbors.len(),
            });
        }
        let mut cleaned = Vec::with_capacity(n);
        let mut closed = Vec::with_capacity(n);
        for (i, mut u) in neighbors.into_iter().enumerate() {
            u.sort_unstable();
            u.dedup();
            for &j in &u {
                dims.check_player(j)?;
            }
            if u.contains(&i) {
                return Err(Error::InvalidScope("a player cannot be its own neighbor"));
            }
            let mut c = u.clone();
            c.push(i);
            c.sort_unstable();
            cleaned.push(u);
            closed.push(c);
        }
        Ok(Self {
            dims,
            neighbors: cleaned,
            closed,
            utilities: None,
        })
    }

    /// Every player observes every other player.
    pub fn full_information(dims: Dims) -> Result<Self> {
        let n = dims.players();
        let neighbors = (0..n)
            .map(|i| (0..n).filter(|&j| j != i).collect())
            .collect();
        Self::new(dims, neighbors)
    }

    /// Attaches utilities; utility `i` must be scoped to exactly `N_i`.
    pub fn with_utilities(mut self, utilities: Vec<GameFunction>) -> Result<Self> {
        if utilities.len() != self.players() {
            return Err(Error::LengthMismatch {
                expected: self.players(),
                found: utilities.len(),
            });
        }
        for (u, n_i) in utilities.iter().zip(&self.closed) {
            if u.scope() != n_i.as_slice() {
                return Err(Error::InvalidScope(
                    "utility scope must equal the closed neighborhood",
                ));
            }
        }
        self.utilities = Some(utilities);
        Ok(self)
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn players(&self) -> usize {
        self.dims.players()
    }

    /// `U(i)`
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// `N_i = U(i) ∪ {i}`, ascending.
    pub fn closed_neighborhood(&self, i: usize) -> &[usize] {
        &self.closed[i]
    }

    /// `N ∖ {i}`, ascending.
    pub fn others(&self, i: usize) -> Vec<usize> {
        (0..self.players()).filter(|&j| j != i).collect()
    }

    pub fn utilities(&self) -> Option<&[GameFunction]> {
        self.utilities.as_deref()
    }

    pub fn utility(&self, i: usize) -> Result<&GameFunction> {
        self.dims.check_player(i)?;
        self.utilities
            .as_ref()
            .map(|u| &u[i])
            .ok_or(Error::MissingUtility { player: i })
    }

    pub(crate) fn require_utilities(&self) -> Result<&[GameFunction]> {
        self.utilities
            .as_deref()
            .ok_or(Error::MissingUtility { player: 0 })
    }
}

/// Per-player verdict of [`is_potential_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialReport {
    pub ok: bool,
    pub max_deviation: f64,
    pub per_player: Vec<f64>,
}

/// Checks that `potential` is an exact potential of `game`: for every player
/// `c_i − P` must not depend on `x_i`.
pub fn is_potential_with(
    game: &NetworkedGame,
    potential: &GameFunction,
    tol: f64,
    limits: &Limits,
) -> Result<PotentialReport> {
    let utilities = game.require_utilities()?;
    let dims = game.dims();
    let p = potential.lift(dims, limits)?;
    let mut per_player = Vec::with_capacity(dims.players());
    for (i, u) in utilities.iter().enumerate() {
        let mut r = u.lift(dims, limits)?;
        for (a, b) in r.iter_mut().zip(&p) {
            *a -= b;
        }
        per_player.push(scope_check(dims, &r, &game.others(i), tol)?.max);
    }
    let max_deviation = per_player.iter().copied().fold(0.0, f64::max);
    Ok(PotentialReport {
        ok: max_deviation <= tol,
        max_deviation,
        per_player,
    })
}
