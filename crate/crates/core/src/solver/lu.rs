//! Sparse left-looking LU factorization of a simplex basis with
//! product-form eta updates.
//!
//! Step `k` of the factorization pivots on row `pivot_row[k]` for the basis
//! position `pivot_pos[k]`. Basis column `pivot_pos[j]` equals
//! `sum_k U[k][j] * L_k` where `L_k` is unit at `pivot_row[k]` and only has
//! entries in rows pivoted after step `k`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Eta<T> {
    pos: usize,
    pivot: T,
    entries: Vec<(usize, T)>,
}

#[derive(Debug, Clone)]
pub(crate) struct LuFactor<T> {
    m: usize,
    pivot_row: Vec<usize>,
    pivot_pos: Vec<usize>,
    l_cols: Vec<Vec<(usize, T)>>,
    u_cols: Vec<Vec<(usize, T)>>,
    u_diag: Vec<T>,
    etas: Vec<Eta<T>>,
}

/// Basis positions whose columns were numerically dependent, and rows left
/// without a pivot. Both lists have the same length.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

impl<T: Scalar> LuFactor<T> {
    /// Factorizes the `m x m` basis whose column at position `p` is `column(p)`
    /// given as `(row, value)` pairs.
    pub fn factorize<'a, F>(m: usize, column: F, pivot_tol: T) -> Result<Self, Singular>
    where
        F: Fn(usize) -> &'a [(usize, T)],
        T: 'a,
    {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| column(p).len());

        let mut lu = Self {
            m,
            pivot_row: Vec::with_capacity(m),
            pivot_pos: Vec::with_capacity(m),
            l_cols: Vec::with_capacity(m),
            u_cols: Vec::with_capacity(m),
            u_diag: Vec::with_capacity(m),
            etas: Vec::new(),
        };
        let mut row_step = vec![usize::MAX; m];
        let mut x = vec![T::zero(); m];
        let mut touched: Vec<usize> = Vec::new();
        let mut is_touched = vec![false; m];
        let mut deficient = Vec::new();

        for &pos in &order {
            for &(r, v) in column(pos) {
                if !is_touched[r] {
                    is_touched[r] = true;
                    touched.push(r);
                }
                x[r] += v;
            }
            let scale = touched.iter().fold(T::zero(), |acc, &r| acc.max(x[r].abs()));
            // Eliminate with earlier pivots in step order. L_k only reaches
            // rows pivoted after step k, so a min-heap of pending steps
            // visits exactly the steps the column depends on.
            let mut pending: BinaryHeap<Reverse<usize>> =
                touched.iter().filter(|&&r| row_step[r] != usize::MAX).map(|&r| Reverse(row_step[r])).collect();
            let mut last_step = None;
            while let Some(Reverse(k)) = pending.pop() {
                if last_step == Some(k) {
                    continue;
                }
                last_step = Some(k);
                let xp = x[lu.pivot_row[k]];
                if xp == T::zero() {
                    continue;
                }
                for &(r, l) in &lu.l_cols[k] {
                    if !is_touched[r] {
                        is_touched[r] = true;
                        touched.push(r);
                        if row_step[r] != usize::MAX {
                            pending.push(Reverse(row_step[r]));
                        }
                    }
                    x[r] -= l * xp;
                }
            }

            let mut best: Option<(usize, T)> = None;
            for &r in &touched {
                if row_step[r] != usize::MAX {
                    continue;
                }
                let a = x[r].abs();
                match best {
                    Some((br, bv)) if a < bv || (a == bv && r > br) => {}
                    _ => best = Some((r, a)),
                }
            }
            let threshold = pivot_tol * T::one().max(scale);
            match best {
                Some((prow, pabs)) if pabs > threshold => {
                    let piv = x[prow];
                    let mut ucol = Vec::new();
                    let mut lcol = Vec::new();
                    touched.sort_unstable();
                    for &r in &touched {
                        let v = x[r];
                        if v == T::zero() || r == prow {
                            continue;
                        }
                        if row_step[r] != usize::MAX {
                            ucol.push((row_step[r], v));
                        } else {
                            lcol.push((r, v / piv));
                        }
                    }
                    row_step[prow] = lu.pivot_row.len();
                    lu.pivot_row.push(prow);
                    lu.pivot_pos.push(pos);
                    lu.u_cols.push(ucol);
                    lu.l_cols.push(lcol);
                    lu.u_diag.push(piv);
                }
                _ => deficient.push(pos),
            }
            for &r in &touched {
                x[r] = T::zero();
                is_touched[r] = false;
            }
            touched.clear();
        }

        if deficient.is_empty() {
            Ok(lu)
        } else {
            let rows = (0..m).filter(|&r| row_step[r] == usize::MAX).collect();
            Err(Singular { positions: deficient, rows })
        }
    }

    pub fn num_updates(&self) -> usize {
        self.etas.len()
    }

    /// Solves `B y = a`; `a` is indexed by row, the result by basis position.
    pub fn ftran(&self, a: &[T]) -> Vec<T> {
        let mut v = a.to_vec();
        let mut w = vec![T::zero(); self.m];
        for k in 0..self.m {
            let vk = v[self.pivot_row[k]];
            w[k] = vk;
            if vk == T::zero() {
                continue;
            }
            for &(r, l) in &self.l_cols[k] {
                v[r] -= l * vk;
            }
        }
        for k in (0..self.m).rev() {
            if w[k] == T::zero() {
                continue;
            }
            w[k] /= self.u_diag[k];
            let wk = w[k];
            for &(j, u) in &self.u_cols[k] {
                w[j] -= u * wk;
            }
        }
        let mut y = vec![T::zero(); self.m];
        for k in 0..self.m {
            y[self.pivot_pos[k]] = w[k];
        }
        for eta in &self.etas {
            let yp = y[eta.pos] / eta.pivot;
            y[eta.pos] = yp;
            if yp != T::zero() {
                for &(i, d) in &eta.entries {
                    y[i] -= d * yp;
                }
            }
        }
        y
    }

    /// Solves `y^T B = c^T`; `c` is indexed by basis position, the result by
    /// row.
    pub fn btran(&self, c: &[T]) -> Vec<T> {
        let mut c = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos];
            for &(i, d) in &eta.entries {
                s -= d * c[i];
            }
            c[eta.pos] = s / eta.pivot;
        }
        let mut t = vec![T::zero(); self.m];
        for k in 0..self.m {
            let mut s = c[self.pivot_pos[k]];
            for &(j, u) in &self.u_cols[k] {
                s -= u * t[j];
            }
            t[k] = s / self.u_diag[k];
        }
        let mut y = vec![T::zero(); self.m];
        for k in (0..self.m).rev() {
            let mut s = t[k];
            for &(r, l) in &self.l_cols[k] {
                s -= l * y[r];
            }
            y[self.pivot_row[k]] = s;
        }
        y
    }

    /// Records the replacement of basis position `pos` by a column whose
    /// FTRAN image is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[T]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &d)| i != pos && d != T::zero())
            .map(|(i, &d)| (i, d))
            .collect();
        self.etas.push(Eta { pos, pivot: alpha[pos], entries });
    }
}
