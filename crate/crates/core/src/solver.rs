//! Minimum-norm least-squares solvers.
//!
//! Two independent routes: CGLS on an operator that is only ever applied
//! (never stored), and a pseudo-inverse built from the spectral decomposition
//! of a dense matrix's Gram matrix.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::stp::DenseMatrix;
use crate::{dot, norm, Error, Result};

pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgParams {
    /// Stop when `‖Aᵀr‖ ≤ tol·‖Aᵀb‖`.
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative normal residual `‖Aᵀ(b − Ax)‖ / ‖Aᵀb‖` at exit.
    pub normal_residual: f64,
}

/// Conjugate gradients on the normal equations, started at zero.
///
/// Every iterate lies in the row space of `A`, so the limit is the
/// minimum-norm least-squares solution even when `AᵀA` is singular.
/// The iteration order is fixed, which makes the result bitwise reproducible.
pub fn cgls(op: &impl LinearOperator, b: &[f64], params: CgParams) -> Result<CgOutcome> {
    if b.len() != op.rows() {
        return Err(Error::LengthMismatch {
            expected: op.rows(),
            found: b.len(),
        });
    }
    let mut x = vec![0.0; op.cols()];
    let mut r = b.to_vec();
    let mut s = op.apply_transpose(&r)?;
    let s0 = norm(&s);
    if s0 == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            normal_residual: 0.0,
        });
    }
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let mut rel = 1.0;
    for it in 1..=params.max_iter {
        let q = op.apply(&p)?;
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        for (xi, pi) in x.iter_mut().zip(&p) {
            *xi += alpha * pi;
        }
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= alpha * qi;
        }
        s = op.apply_transpose(&r)?;
        let gamma_next = dot(&s, &s);
        rel = libm::sqrt(gamma_next) / s0;
        if rel <= params.tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                normal_residual: rel,
            });
        }
        let beta = gamma_next / gamma;
        gamma = gamma_next;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    Err(Error::SolverFailure {
        player: 0,
        iterations: params.max_iter,
        best_residual: rel,
    })
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

/// Eigendecomposition of the smaller Gram matrix of `a` (`AAᵀ` for wide
/// matrices, `AᵀA` for tall ones). Its eigenvalues are the squared singular
/// values of `a`.
// nalgebra's bidiagonal SVD loses accuracy on the 0/1 Kronecker-structured
// matrices used here (reconstruction errors near 1); the symmetric eigensolver
// does not.
struct GramEigen {
    a: DMatrix<f64>,
    wide: bool,
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    threshold: f64,
}

impl GramEigen {
    fn new(m: &DenseMatrix) -> Self {
        let a = to_nalgebra(m);
        let wide = a.nrows() <= a.ncols();
        let gram = if wide {
            &a * a.transpose()
        } else {
            a.transpose() * &a
        };
        let eig = gram.symmetric_eigen();
        let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let threshold = m.rows().max(m.cols()) as f64 * f64::EPSILON * lambda_max;
        Self {
            a,
            wide,
            eig,
            threshold,
        }
    }

    fn rank(&self) -> usize {
        self.eig
            .eigenvalues
            .iter()
            .filter(|&&l| l > self.threshold)
            .count()
    }

    /// `G⁺ v` over the retained eigenpairs.
    fn gram_pinv(&self, v: &DVector<f64>) -> DVector<f64> {
        let q = &self.eig.eigenvectors;
        let mut coeff = q.transpose() * v;
        for (c, &l) in coeff.iter_mut().zip(self.eig.eigenvalues.iter()) {
            *c = if l > self.threshold { *c / l } else { 0.0 };
        }
        q * coeff
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let b = DVector::from_column_slice(b);
        let x = if self.wide {
            self.a.transpose() * self.gram_pinv(&b)
        } else {
            self.gram_pinv(&(self.a.transpose() * b))
        };
        x.as_slice().to_vec()
    }
}

/// `A⁺b` computed from the materialized matrix.
pub fn min_norm_dense(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::LengthMismatch {
            expected: a.rows(),
            found: b.len(),
        });
    }
    Ok(GramEigen::new(a).solve(b))
}

/// Numerical rank: number of squared singular values above
/// `max(rows, cols)·ε·σ_max²`.
pub fn numeric_rank(a: &DenseMatrix) -> usize {
    GramEigen::new(a).rank()
}
