//! Semi-tensor product algebra and strategy-profile indexing.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Limits, Result};

/// Strategy counts `k_0..k_{n-1}` of the players and their product `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims {
    cards: Vec<usize>,
    total: usize,
}

impl Dims {
    pub fn new(cards: Vec<usize>) -> Result<Self> {
        Self::with_limits(cards, &Limits::default())
    }

    pub fn with_limits(cards: Vec<usize>, limits: &Limits) -> Result<Self> {
        if cards.is_empty() {
            return Err(Error::InvalidDims("at least one player is required"));
        }
        if cards.iter().any(|&c| c < 2) {
            return Err(Error::InvalidDims(
                "every player needs at least 2 strategies",
            ));
        }
        let total = checked_product(cards.iter().copied())?;
        limits.check_vector(total)?;
        Ok(Self { cards, total })
    }

    pub fn players(&self) -> usize {
        self.cards.len()
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn card(&self, player: usize) -> usize {
        self.cards[player]
    }

    /// Number of strategy profiles `k`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Product of the strategy counts over a player subset (1 for the empty set).
    pub fn scoped_total(&self, scope: &[usize]) -> usize {
        scope.iter().map(|&j| self.cards[j]).product()
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player < self.players() {
            Ok(())
        } else {
            Err(Error::InvalidPlayer {
                player,
                players: self.players(),
            })
        }
    }

    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        if profile.len() != self.players() {
            return Err(Error::ProfileLength {
                expected: self.players(),
                found: profile.len(),
            });
        }
        for (player, (&s, &c)) in profile.0.iter().zip(&self.cards).enumerate() {
            if s >= c {
                return Err(Error::InvalidProfile {
                    player,
                    strategy: s,
                    cardinality: c,
                });
            }
        }
        Ok(())
    }

    /// Index `m` with `δ_{k_0}^{x_0} ⋉ ⋯ ⋉ δ_{k_{n-1}}^{x_{n-1}} = δ_k^m` (all 0-based).
    pub fn encode(&self, profile: &Profile) -> Result<usize> {
        self.check_profile(profile)?;
        Ok(self.encode_unchecked(&profile.0))
    }

    pub(crate) fn encode_unchecked(&self, strategies: &[usize]) -> usize {
        strategies
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    /// Index of the sub-profile of `strategies` restricted to `scope`.
    pub(crate) fn encode_scoped(&self, scope: &[usize], strategies: &[usize]) -> usize {
        scope
            .iter()
            .fold(0, |acc, &j| acc * self.cards[j] + strategies[j])
    }

    pub fn decode(&self, index: usize) -> Result<Profile> {
        if index >= self.total {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.total,
            });
        }
        let mut strategies = vec![0; self.players()];
        self.decode_into(index, &mut strategies);
        Ok(Profile(strategies))
    }

    pub(crate) fn decode_into(&self, mut index: usize, out: &mut [usize]) {
        for (slot, &c) in out.iter_mut().zip(&self.cards).rev() {
            *slot = index % c;
            index /= c;
        }
    }

    /// All profiles in index order.
    pub fn profiles(&self) -> impl Iterator<Item = Profile> + '_ {
        (0..self.total).map(move |i| {
            let mut s = vec![0; self.players()];
            self.decode_into(i, &mut s);
            Profile(s)
        })
    }
}

pub(crate) fn checked_product(it: impl IntoIterator<Item = usize>) -> Result<usize> {
    it.into_iter()
        .try_fold(1usize, |acc, x| acc.checked_mul(x))
        .ok_or(Error::DimensionOverflow)
}

/// A pure-strategy profile, one 0-based strategy per player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Profile(Vec<usize>);

impl Profile {
    pub fn new(strategies: Vec<usize>) -> Self {
        Self(strategies)
    }

    /// Builds a profile from the 1-based strategy labels used in files.
    pub fn from_one_based(labels: &[usize]) -> Option<Self> {
        labels
            .iter()
            .map(|&s| s.checked_sub(1))
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|s| s + 1).collect()
    }

    pub fn strategies(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn set(&mut self, player: usize, strategy: usize) {
        self.0[player] = strategy;
    }

    /// Copy with player `player` switched to `strategy`.
    pub fn with(&self, player: usize, strategy: usize) -> Self {
        let mut p = self.clone();
        p.0[player] = strategy;
        p
    }
}

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDims("matrix dimensions must be positive"));
        }
        let len = rows.checked_mul(cols).ok_or(Error::DimensionOverflow)?;
        if data.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// The basis column `δ_n^i` (0-based `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut m = Self::zeros(n, 1);
        m.data[i] = 1.0;
        m
    }

    pub fn column(values: &[f64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn row(values: &[f64]) -> Self {
        Self {
            rows: 1,
            cols: values.len(),
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::LengthMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| crate::dot(row, v))
            .collect())
    }

    pub fn kron(&self, other: &Self, limits: &Limits) -> Result<Self> {
        let rows = self
            .rows
            .checked_mul(other.rows)
            .ok_or(Error::DimensionOverflow)?;
        let cols = self
            .cols
            .checked_mul(other.cols)
            .ok_or(Error::DimensionOverflow)?;
        limits.check_materialize(rows, cols)?;
        Ok(Self::from_fn(rows, cols, |r, c| {
            self.get(r / other.rows, c / other.cols) * other.get(r % other.rows, c % other.cols)
        }))
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Left semi-tensor product `A ⋉ B = (A ⊗ I_{l/n})(B ⊗ I_{l/p})`, `l = lcm(n, p)`
/// where `n = cols(A)` and `p = rows(B)`.
pub fn stp(a: &DenseMatrix, b: &DenseMatrix, limits: &Limits) -> Result<DenseMatrix> {
    let n = a.cols;
    let p = b.rows;
    let l = (n / gcd(n, p))
        .checked_mul(p)
        .ok_or(Error::DimensionOverflow)?;
    if l == n && l == p {
        return a.matmul(b);
    }
    let left = a.kron(&DenseMatrix::identity(l / n), limits)?;
    let right = b.kron(&DenseMatrix::identity(l / p), limits)?;
    limits.check_materialize(left.rows, right.cols)?;
    left.matmul(&right)
}
