//! Utility design equations.
//!
//! For player `i` the unknown `ξ_i = [ξ_i¹; ξ_i²]` must satisfy
//!
//! ```text
//! T_i ξ_i = Γ_{N_i}ᵀ ξ_i¹ + Γ_{−i}ᵀ ξ_i² = V^φ
//! ```
//!
//! so that `c_i = ξ_i¹` (a function of `N_i` only) and `d_i = −ξ_i²` (a function
//! of everybody but `i`) decompose the objective as `φ = c_i − d_i`. Solvability
//! for every player is exactly the condition under which `φ` is a potential of
//! the game with local utilities `c_i`.

use alloc::vec::Vec;

use crate::game::{GameFunction, NetworkedGame};
use crate::operator::{Factor, FactorOperator};
use crate::solver::{self, CgParams, LinearOperator};
use crate::stp::DenseMatrix;
use crate::{norm, Error, Limits, Result};

/// Default bound on `‖T_i ξ_i − V^φ‖ / ‖V^φ‖` for a system to count as solvable.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Default CGLS stopping tolerance on the relative normal residual.
pub const CG_TOL: f64 = 1e-12;

/// `T_i = [Γ_{N_i}ᵀ, Γ_{−i}ᵀ]`, kept as two matrix-free blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignOperator {
    player: usize,
    left: FactorOperator,
    right: FactorOperator,
}

impl DesignOperator {
    pub fn player(&self) -> usize {
        self.player
    }

    /// `Γ_{N_i}ᵀ`, `k × k_{N_i}`.
    pub fn left(&self) -> &FactorOperator {
        &self.left
    }

    /// `Γ_{−i}ᵀ`, `k × k_{−i}`.
    pub fn right(&self) -> &FactorOperator {
        &self.right
    }

    /// Position where `ξ_i²` starts inside `ξ_i`.
    pub fn split(&self) -> usize {
        self.left.cols()
    }

    pub fn materialize(&self, limits: &Limits) -> Result<DenseMatrix> {
        limits.check_materialize(self.rows(), self.cols())?;
        let l = self.left.materialize(limits)?;
        let r = self.right.materialize(limits)?;
        let split = self.split();
        Ok(DenseMatrix::from_fn(
            self.rows(),
            self.cols(),
            |row, col| {
                if col < split {
                    l.get(row, col)
                } else {
                    r.get(row, col - split)
                }
            },
        ))
    }
}

impl LinearOperator for DesignOperator {
    fn rows(&self) -> usize {
        self.left.rows()
    }

    fn cols(&self) -> usize {
        self.left.cols() + self.right.cols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols() {
            return Err(Error::LengthMismatch {
                expected: self.cols(),
                found: x.len(),
            });
        }
        let (x1, x2) = x.split_at(self.split());
        let mut y = self.left.apply(x1)?;
        for (a, b) in y.iter_mut().zip(self.right.apply(x2)?) {
            *a += b;
        }
        Ok(y)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.left.apply_transpose(y)?;
        x.extend(self.right.apply_transpose(y)?);
        Ok(x)
    }
}

pub fn build_design_operator(game: &NetworkedGame, player: usize) -> Result<DesignOperator> {
    let dims = game.dims();
    dims.check_player(player)?;
    let left = FactorOperator::drawing(dims, game.closed_neighborhood(player))?.transpose();
    let right = FactorOperator::drawing(dims, &game.others(player))?.transpose();
    Ok(DesignOperator {
        player,
        left,
        right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Dense pseudo-inverse when `T_i` fits under the materialization cap, CGLS otherwise.
    #[default]
    Auto,
    Dense,
    MatrixFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    DensePseudoInverse,
    Cgls { iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub tolerance: f64,
    pub solver: SolverChoice,
    pub cg_tol: f64,
    /// CGLS iteration cap is `max_iter_factor · (k_{N_i} + k_{−i})`.
    pub max_iter_factor: usize,
    pub limits: Limits,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            tolerance: FEASIBILITY_TOL,
            solver: SolverChoice::Auto,
            cg_tol: CG_TOL,
            max_iter_factor: 10,
            limits: Limits::default(),
        }
    }
}

/// Solution of one player's design system.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerDesign {
    pub player: usize,
    /// `N_i`, the scope of `xi1`.
    pub scope: Vec<usize>,
    /// Structure vector of `c_i` over `N_i`.
    pub xi1: Vec<f64>,
    /// `−d_i` over `N ∖ {i}`.
    pub xi2: Vec<f64>,
    /// `‖T_i ξ_i − V^φ‖`
    pub residual: f64,
    pub relative_residual: f64,
    pub feasible: bool,
    /// `k_{U(i)}`, the dimension of the solution family.
    pub family_dim: usize,
    pub method: SolveMethod,
}

impl PlayerDesign {
    pub fn utility(&self, game: &NetworkedGame) -> Result<GameFunction> {
        GameFunction::new(game.dims(), self.scope.clone(), self.xi1.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub players: Vec<PlayerDesign>,
    pub tolerance: f64,
    pub objective_norm: f64,
}

impl DesignSolution {
    pub fn feasible(&self) -> bool {
        self.players.iter().all(|p| p.feasible)
    }

    /// The designed game with utilities `c_i = ξ_i¹`.
    pub fn designed_game(&self, game: &NetworkedGame) -> Result<NetworkedGame> {
        let utilities = self
            .players
            .iter()
            .map(|p| p.utility(game))
            .collect::<Result<Vec<_>>>()?;
        game.clone().with_utilities(utilities)
    }
}

fn check_objective(game: &NetworkedGame, vphi: &[f64]) -> Result<()> {
    if vphi.len() != game.dims().total() {
        return Err(Error::LengthMismatch {
            expected: game.dims().total(),
            found: vphi.len(),
        });
    }
    Ok(())
}

/// Minimum-norm least-squares solution of player `player`'s design system.
pub fn solve_player(
    game: &NetworkedGame,
    vphi: &[f64],
    player: usize,
    opts: &DesignOptions,
) -> Result<PlayerDesign> {
    check_objective(game, vphi)?;
    let op = build_design_operator(game, player)?;
    let dense = match opts.solver {
        SolverChoice::Dense => true,
        SolverChoice::MatrixFree => false,
        SolverChoice::Auto => opts.limits.check_materialize(op.rows(), op.cols()).is_ok(),
    };
    let (xi, method) = if dense {
        let t = op.materialize(&opts.limits)?;
        let xi = solver::min_norm_dense(&t, vphi).map_err(|e| with_player(e, player))?;
        (xi, SolveMethod::DensePseudoInverse)
    } else {
        let params = CgParams {
            tol: opts.cg_tol,
            max_iter: opts.max_iter_factor * op.cols(),
        };
        let out = solver::cgls(&op, vphi, params).map_err(|e| with_player(e, player))?;
        (
            out.x,
            SolveMethod::Cgls {
                iterations: out.iterations,
            },
        )
    };

    let mut r = op.apply(&xi)?;
    for (a, b) in r.iter_mut().zip(vphi) {
        *a -= b;
    }
    let residual = norm(&r);
    let phi_norm = norm(vphi);
    let relative_residual = if phi_norm > 0.0 {
        residual / phi_norm
    } else {
        residual
    };
    let mut xi1 = xi;
    let xi2 = xi1.split_off(op.split());
    Ok(PlayerDesign {
        player,
        scope: game.closed_neighborhood(player).to_vec(),
        xi1,
        xi2,
        residual,
        relative_residual,
        feasible: residual <= opts.tolerance * phi_norm,
        family_dim: game.dims().scoped_total(game.neighbors(player)),
        method,
    })
}

fn with_player(e: Error, player: usize) -> Error {
    match e {
        Error::SolverFailure {
            iterations,
            best_residual,
            ..
        } => Error::SolverFailure {
            player,
            iterations,
            best_residual,
        },
        other => other,
    }
}

/// Solves every player's system; the systems are independent.
pub fn solve_min_norm(
    game: &NetworkedGame,
    vphi: &[f64],
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    check_objective(game, vphi)?;
    let players = (0..game.players())
        .map(|i| solve_player(game, vphi, i, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignSolution {
        players,
        tolerance: opts.tolerance,
        objective_norm: norm(vphi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub player: usize,
    pub feasible: bool,
    pub relative_residual: f64,
}

/// Decides, per player, whether `V^φ` lies in the column space of `T_i`.
/// Feasible for every player is the same as `V^φ ∈ ⋂_i Span Col(T_i)`.
pub fn check_existence(
    game: &NetworkedGame,
    vphi: &[f64],
    opts: &DesignOptions,
) -> Result<Vec<Feasibility>> {
    Ok(solve_min_norm(game, vphi, opts)?
        .players
        .into_iter()
        .map(|p| Feasibility {
            player: p.player,
            feasible: p.feasible,
            relative_residual: p.relative_residual,
        })
        .collect())
}

/// `Λ_{N_i} = ⊗_{j∈N_i} Λ_j` with `Λ_i = 1_{k_i}` and `Λ_j = I_{k_j}` for `j ∈ U(i)`.
pub fn lambda_operator(game: &NetworkedGame, player: usize) -> Result<FactorOperator> {
    game.dims().check_player(player)?;
    let factors = game
        .closed_neighborhood(player)
        .iter()
        .map(|&j| {
            let k = game.dims().card(j);
            if j == player {
                Factor::OnesColumn(k)
            } else {
                Factor::Identity(k)
            }
        })
        .collect();
    FactorOperator::new(factors)
}

/// `Υ_{N_i} = ⊗_{j≠i} Υ_j` with `Υ_j = I_{k_j}` for `j ∈ U(i)` and `1_{k_j}` otherwise.
pub fn upsilon_operator(game: &NetworkedGame, player: usize) -> Result<FactorOperator> {
    game.dims().check_player(player)?;
    let u = game.neighbors(player);
    let factors = game
        .others(player)
        .into_iter()
        .map(|j| {
            let k = game.dims().card(j);
            if u.contains(&j) {
                Factor::Identity(k)
            } else {
                Factor::OnesColumn(k)
            }
        })
        .collect();
    FactorOperator::new(factors)
}

/// `H_i = [Λ_{N_i}; −Υ_{N_i}]`, whose columns span the kernel of `T_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpaceBasis {
    pub lambda: FactorOperator,
    pub upsilon: FactorOperator,
}

impl NullSpaceBasis {
    /// Number of columns, `k_{U(i)}`.
    pub fn dim(&self) -> usize {
        self.lambda.cols()
    }

    /// `H_i ζ`
    pub fn apply(&self, zeta: &[f64]) -> Result<Vec<f64>> {
        let mut h = self.lambda.apply(zeta)?;
        h.extend(self.upsilon.apply(zeta)?.into_iter().map(|v| -v));
        Ok(h)
    }

    pub fn materialize(&self, limits: &Limits) -> Result<DenseMatrix> {
        let l = self.lambda.materialize(limits)?;
        let u = self.upsilon.materialize(limits)?;
        let rows = l.rows() + u.rows();
        limits.check_materialize(rows, self.dim())?;
        Ok(DenseMatrix::from_fn(rows, self.dim(), |r, c| {
            if r < l.rows() {
                l.get(r, c)
            } else {
                -u.get(r - l.rows(), c)
            }
        }))
    }
}

pub fn null_space_basis(game: &NetworkedGame, player: usize) -> Result<NullSpaceBasis> {
    Ok(NullSpaceBasis {
        lambda: lambda_operator(game, player)?,
        upsilon: upsilon_operator(game, player)?,
    })
}

/// `ξ_i¹ + Λ_{N_i} ζ`: another structure vector for `c_i` that keeps `φ` as
/// potential, since the added term does not depend on `x_i`.
pub fn family_member(
    game: &NetworkedGame,
    design: &PlayerDesign,
    zeta: &[f64],
) -> Result<Vec<f64>> {
    let shift = lambda_operator(game, design.player)?.apply(zeta)?;
    Ok(design.xi1.iter().zip(shift).map(|(a, b)| a + b).collect())
}

/// Moves a whole solution along the kernel: `ξ_i ← ξ_i + H_i ζ_i`. The
/// residual is unchanged and `ξ_i¹` becomes the family member for `ζ_i`.
pub fn shift_solution(
    game: &NetworkedGame,
    solution: &DesignSolution,
    zetas: &[Vec<f64>],
) -> Result<DesignSolution> {
    if zetas.len() != solution.players.len() {
        return Err(Error::LengthMismatch {
            expected: solution.players.len(),
            found: zetas.len(),
        });
    }
    let mut out = solution.clone();
    for (p, zeta) in out.players.iter_mut().zip(zetas) {
        let basis = null_space_basis(game, p.player)?;
        let h = basis.apply(zeta)?;
        let (h1, h2) = h.split_at(p.xi1.len());
        for (a, b) in p.xi1.iter_mut().zip(h1) {
            *a += b;
        }
        for (a, b) in p.xi2.iter_mut().zip(h2) {
            *a += b;
        }
    }
    Ok(out)
}

/// Rank of `T_i` next to the two closed-form candidates for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankReport {
    pub player: usize,
    pub measured_rank: usize,
    /// `k_{N_i} − k_{U(i)}`
    pub stated_formula: usize,
    /// `k_{N_i} + k_{−i} − k_{U(i)}`, the dimension of the sum of the two
    /// column spaces (functions of `N_i` plus functions of `N ∖ {i}`, which
    /// overlap in functions of `U(i)`).
    pub derived_formula: usize,
    pub augmented_rank: Option<usize>,
}

/// Measures `rank(T_i)` numerically, and `rank[T_i, V^φ]` when `vphi` is given.
pub fn rank_diagnostics(
    game: &NetworkedGame,
    player: usize,
    vphi: Option<&[f64]>,
    limits: &Limits,
) -> Result<RankReport> {
    let op = build_design_operator(game, player)?;
    let t = op.materialize(limits)?;
    let measured_rank = solver::numeric_rank(&t);
    let dims = game.dims();
    let k_n = dims.scoped_total(game.closed_neighborhood(player));
    let k_u = dims.scoped_total(game.neighbors(player));
    let k_minus = dims.scoped_total(&game.others(player));
    let augmented_rank = match vphi {
        Some(v) => {
            check_objective(game, v)?;
            limits.check_materialize(t.rows(), t.cols() + 1)?;
            let aug = DenseMatrix::from_fn(t.rows(), t.cols() + 1, |r, c| {
                if c < t.cols() {
                    t.get(r, c)
                } else {
                    v[r]
                }
            });
            Some(solver::numeric_rank(&aug))
        }
        None => None,
    };
    Ok(RankReport {
        player,
        measured_rank,
        stated_formula: k_n - k_u,
        derived_formula: k_n + k_minus - k_u,
        augmented_rank,
    })
}
