//! Matrix-free Kronecker products of identity and all-ones factors.
//!
//! Every drawing matrix used by the design equations is a Kronecker product
//! whose factors are `I_k`, the column `1_k` or the row `1_kᵀ`. Such an
//! operator is applied one mode at a time on the lexicographically flattened
//! tensor, so no 0/1 entry is ever stored.

use alloc::vec;
use alloc::vec::Vec;

use crate::stp::{checked_product, DenseMatrix, Dims};
use crate::{Error, Limits, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// `I_k`
    Identity(usize),
    /// `1_k`, a `k × 1` column of ones.
    OnesColumn(usize),
    /// `1_kᵀ`, a `1 × k` row of ones.
    OnesRow(usize),
}

impl Factor {
    pub fn rows(self) -> usize {
        match self {
            Factor::Identity(k) | Factor::OnesColumn(k) => k,
            Factor::OnesRow(_) => 1,
        }
    }

    pub fn cols(self) -> usize {
        match self {
            Factor::Identity(k) | Factor::OnesRow(k) => k,
            Factor::OnesColumn(_) => 1,
        }
    }

    pub fn transpose(self) -> Self {
        match self {
            Factor::Identity(k) => Factor::Identity(k),
            Factor::OnesColumn(k) => Factor::OnesRow(k),
            Factor::OnesRow(k) => Factor::OnesColumn(k),
        }
    }

    fn to_dense(self) -> DenseMatrix {
        match self {
            Factor::Identity(k) => DenseMatrix::identity(k),
            Factor::OnesColumn(k) => DenseMatrix::from_fn(k, 1, |_, _| 1.0),
            Factor::OnesRow(k) => DenseMatrix::from_fn(1, k, |_, _| 1.0),
        }
    }
}

/// `F_1 ⊗ F_2 ⊗ ⋯ ⊗ F_m` for structural factors `F_j`. An empty factor list is
/// the `1 × 1` identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorOperator {
    factors: Vec<Factor>,
    rows: usize,
    cols: usize,
}

impl FactorOperator {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.iter().any(|f| {
            matches!(
                f,
                Factor::Identity(0) | Factor::OnesColumn(0) | Factor::OnesRow(0)
            )
        }) {
            return Err(Error::InvalidDims("factor of size zero"));
        }
        let rows = checked_product(factors.iter().map(|f| f.rows()))?;
        let cols = checked_product(factors.iter().map(|f| f.cols()))?;
        Ok(Self {
            factors,
            rows,
            cols,
        })
    }

    /// The drawing matrix `Γ_U = ⊗_j γ_j` with `γ_j = I_{k_j}` for `j ∈ U` and
    /// `1_{k_j}ᵀ` otherwise. It maps `δ_k^{x}` to the sub-profile basis vector
    /// of the players in `U`.
    pub fn drawing(dims: &Dims, subset: &[usize]) -> Result<Self> {
        for &j in subset {
            dims.check_player(j)?;
        }
        let factors = dims
            .cardinalities()
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if subset.contains(&j) {
                    Factor::Identity(k)
                } else {
                    Factor::OnesRow(k)
                }
            })
            .collect();
        Self::new(factors)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> Self {
        Self {
            factors: self.factors.iter().map(|f| f.transpose()).collect(),
            rows: self.cols,
            cols: self.rows,
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply_counted(v).map(|(out, _)| out)
    }

    pub fn apply_transpose(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.transpose().apply(w)
    }

    /// Applies the operator and also returns the number of scalar additions
    /// and copies performed. Reductions run before expansions, so the count
    /// never exceeds `2·cols + 2·rows`.
    pub fn apply_counted(&self, v: &[f64]) -> Result<(Vec<f64>, usize)> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        let mut shape: Vec<usize> = self.factors.iter().map(|f| f.cols()).collect();
        let mut cur = v.to_vec();
        let mut ops = 0usize;
        let mut touched = false;

        for (mode, f) in self.factors.iter().enumerate() {
            if let Factor::OnesRow(k) = *f {
                let inner: usize = shape[mode + 1..].iter().product();
                let outer = cur.len() / (k * inner);
                let mut next = vec![0.0; outer * inner];
                for o in 0..outer {
                    let dst = &mut next[o * inner..(o + 1) * inner];
                    for c in 0..k {
                        let base = (o * k + c) * inner;
                        for (d, s) in dst.iter_mut().zip(&cur[base..base + inner]) {
                            *d += s;
                        }
                    }
                }
                ops += cur.len();
                shape[mode] = 1;
                cur = next;
                touched = true;
            }
        }
        for (mode, f) in self.factors.iter().enumerate() {
            if let Factor::OnesColumn(k) = *f {
                let inner: usize = shape[mode + 1..].iter().product();
                let outer = cur.len() / inner;
                let mut next = Vec::with_capacity(outer * k * inner);
                for o in 0..outer {
                    let src = &cur[o * inner..(o + 1) * inner];
                    for _ in 0..k {
                        next.extend_from_slice(src);
                    }
                }
                ops += next.len();
                shape[mode] = k;
                cur = next;
                touched = true;
            }
        }
        if !touched {
            ops = cur.len();
        }
        Ok((cur, ops))
    }

    pub fn materialize(&self, limits: &Limits) -> Result<DenseMatrix> {
        limits.check_materialize(self.rows, self.cols)?;
        let mut acc = DenseMatrix::identity(1);
        for f in &self.factors {
            acc = acc.kron(&f.to_dense(), limits)?;
        }
        Ok(acc)
    }
}
