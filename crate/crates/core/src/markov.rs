//! Finite Markov chains: sparse transition matrices, closed communicating
//! classes and exact stationary distributions.

use alloc::vec;
use alloc::vec::Vec;

/// Row-sparse transition matrix; each row lists `(target, probability)` with
/// distinct targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        Self { rows }
    }

    pub fn states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, state: usize) -> &[(usize, f64)] {
        &self.rows[state]
    }

    pub fn prob(&self, from: usize, to: usize) -> f64 {
        self.rows[from]
            .iter()
            .filter(|(t, _)| *t == to)
            .map(|(_, p)| p)
            .sum()
    }

    /// Largest `|Σ_y P(x, y) − 1|` over rows, and the smallest entry.
    pub fn stochasticity(&self) -> (f64, f64) {
        let mut worst = 0.0f64;
        let mut min_entry = f64::INFINITY;
        for row in &self.rows {
            let s: f64 = row.iter().map(|(_, p)| p).sum();
            worst = worst.max((s - 1.0).abs());
            for &(_, p) in row {
                min_entry = min_entry.min(p);
            }
        }
        (worst, min_entry)
    }

    /// `μᵀP`
    pub fn left_mul(&self, mu: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.states()];
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                out[y] += mu[x] * p;
            }
        }
        out
    }

    /// Strongly connected components of the positive-probability graph,
    /// each listed in ascending state order; components are ordered by their
    /// smallest state.
    pub fn communicating_classes(&self) -> Vec<Vec<usize>> {
        let n = self.states();
        // Kosaraju with explicit stacks.
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![(start, 0usize)];
            while let Some((v, next)) = stack.last_mut() {
                let row = &self.rows[*v];
                if *next < row.len() {
                    let (w, p) = row[*next];
                    *next += 1;
                    if p > 0.0 && !seen[w] {
                        seen[w] = true;
                        stack.push((w, 0));
                    }
                } else {
                    order.push(*v);
                    stack.pop();
                }
            }
        }
        let mut reverse = vec![Vec::new(); n];
        for (v, row) in self.rows.iter().enumerate() {
            for &(w, p) in row {
                if p > 0.0 {
                    reverse[w].push(v);
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for &root in order.iter().rev() {
            if comp[root] != usize::MAX {
                continue;
            }
            let id = classes.len();
            let mut members = vec![root];
            comp[root] = id;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &w in &reverse[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        classes.sort_by_key(|c| c[0]);
        classes
    }

    /// Communicating classes that no positive transition leaves.
    pub fn closed_classes(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let classes = self.communicating_classes();
        let mut id = vec![0; self.states()];
        for (c, members) in classes.iter().enumerate() {
            for &v in members {
                id[v] = c;
            }
        }
        let mut closed = Vec::new();
        let mut transient = Vec::new();
        for (c, members) in classes.into_iter().enumerate() {
            let leaks = members
                .iter()
                .any(|&v| self.rows[v].iter().any(|&(w, p)| p > 0.0 && id[w] != c));
            if leaks {
                transient.extend(members);
            } else {
                closed.push(members);
            }
        }
        transient.sort_unstable();
        (closed, transient)
    }

    /// Stationary distribution of the chain restricted to a closed class,
    /// by Grassmann–Taksar–Heyman elimination (subtraction-free, so tiny
    /// probabilities at large inverse temperature keep full relative accuracy).
    /// Returned in the order of `class`.
    pub fn class_stationary(&self, class: &[usize]) -> Vec<f64> {
        let m = class.len();
        let mut local = vec![usize::MAX; self.states()];
        for (i, &v) in class.iter().enumerate() {
            local[v] = i;
        }
        let mut a = vec![0.0; m * m];
        for (i, &v) in class.iter().enumerate() {
            for &(w, p) in &self.rows[v] {
                let j = local[w];
                if j != usize::MAX && j != i {
                    a[i * m + j] += p;
                }
            }
        }
        for n in (1..m).rev() {
            let s: f64 = a[n * m..n * m + n].iter().sum();
            for i in 0..n {
                a[i * m + n] /= s;
            }
            for i in 0..n {
                let f = a[i * m + n];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[i * m + j] += f * a[n * m + j];
                }
            }
        }
        let mut pi = vec![0.0; m];
        pi[0] = 1.0;
        for n in 1..m {
            pi[n] = (0..n).map(|i| pi[i] * a[i * m + n]).sum();
        }
        let total: f64 = pi.iter().sum();
        for p in &mut pi {
            *p /= total;
        }
        pi
    }
}
