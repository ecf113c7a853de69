//! Empty-row/column removal and singleton-row bound tightening.
//!
//! Every reduction is logged so that primal values, row duals and reduced
//! costs of the reduced problem can be mapped back onto the original model.

use crate::scalar::Scalar;
use crate::solver::lp::{LinearProgram, RowSense, Sense};
use crate::solver::simplex::{StdProblem, VarState};
use crate::solver::BasisStatus;

#[derive(Debug, Clone)]
enum Action<T> {
    EmptyRow { row: usize },
    SingletonRow { row: usize, col: usize, coef: T, set_lower: bool, set_upper: bool },
    EmptyColumn { col: usize, value: T },
}

#[derive(Debug, Clone)]
pub(crate) struct Presolved<T> {
    pub problem: StdProblem<T>,
    /// Original index of every reduced column.
    pub col_map: Vec<usize>,
    /// Original index of every reduced row.
    pub row_map: Vec<usize>,
    /// Minimization-sense costs of the original columns.
    cost: Vec<T>,
    lower: Vec<T>,
    upper: Vec<T>,
    log: Vec<Action<T>>,
    n_rows: usize,
    n_cols: usize,
}

#[derive(Debug, Clone)]
pub(crate) enum PresolveOutcome<T> {
    Reduced(Presolved<T>),
    Infeasible,
    Unbounded,
}

/// Solution of the original problem in minimization sense.
pub(crate) struct Postsolved<T> {
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub d: Vec<T>,
    pub col_status: Vec<BasisStatus>,
    pub row_status: Vec<BasisStatus>,
}

pub(crate) fn slack_bounds<T: Scalar>(sense: RowSense) -> (T, T) {
    match sense {
        RowSense::Le => (T::zero(), T::infinity()),
        RowSense::Ge => (T::neg_infinity(), T::zero()),
        RowSense::Eq => (T::zero(), T::zero()),
    }
}

pub(crate) fn presolve<T: Scalar>(lp: &LinearProgram<T>, enabled: bool, tol: T) -> PresolveOutcome<T> {
    let n = lp.num_cols();
    let m = lp.num_rows();
    let sign = if lp.sense == Sense::Maximize { -T::one() } else { T::one() };
    let cost: Vec<T> = lp.columns.iter().map(|c| sign * c.cost).collect();
    let mut lower: Vec<T> = lp.columns.iter().map(|c| c.lower).collect();
    let mut upper: Vec<T> = lp.columns.iter().map(|c| c.upper).collect();

    let mut row_entries: Vec<Vec<(usize, T)>> = vec![Vec::new(); m];
    let mut col_entries: Vec<Vec<(usize, T)>> = vec![Vec::new(); n];
    for &(r, c, v) in &lp.entries {
        if v != T::zero() {
            row_entries[r].push((c, v));
            col_entries[c].push((r, v));
        }
    }
    for e in row_entries.iter_mut().chain(col_entries.iter_mut()) {
        e.sort_by_key(|x| x.0);
    }
    let mut row_alive = vec![true; m];
    let mut col_alive = vec![true; n];
    let row_count: Vec<usize> = row_entries.iter().map(Vec::len).collect();
    let mut col_count: Vec<usize> = col_entries.iter().map(Vec::len).collect();
    let mut log = Vec::new();

    let mut changed = enabled;
    while changed {
        changed = false;
        for i in 0..m {
            if !row_alive[i] {
                continue;
            }
            let row = &lp.rows[i];
            if row_count[i] == 0 {
                let (sl, su) = slack_bounds::<T>(row.sense);
                let scale = T::one().max(row.rhs.abs());
                if row.rhs < sl - tol * scale || row.rhs > su + tol * scale {
                    return PresolveOutcome::Infeasible;
                }
                row_alive[i] = false;
                log.push(Action::EmptyRow { row: i });
                changed = true;
            } else if row_count[i] == 1 {
                let &(j, a) = row_entries[i].iter().find(|e| col_alive[e.0]).expect("live entry");
                let v = row.rhs / a;
                let (mut set_lower, mut set_upper) = (false, false);
                let implies_lower = matches!(
                    (row.sense, a > T::zero()),
                    (RowSense::Eq, _) | (RowSense::Ge, true) | (RowSense::Le, false)
                );
                let implies_upper = matches!(
                    (row.sense, a > T::zero()),
                    (RowSense::Eq, _) | (RowSense::Le, true) | (RowSense::Ge, false)
                );
                if implies_lower && v > lower[j] {
                    lower[j] = v;
                    set_lower = true;
                }
                if implies_upper && v < upper[j] {
                    upper[j] = v;
                    set_upper = true;
                }
                if lower[j] > upper[j] {
                    let scale = T::one().max(lower[j].abs()).max(upper[j].abs());
                    if lower[j] - upper[j] > tol * scale {
                        return PresolveOutcome::Infeasible;
                    }
                    // Within tolerance: collapse onto the row's value.
                    lower[j] = v;
                    upper[j] = v;
                    set_lower = true;
                    set_upper = true;
                }
                row_alive[i] = false;
                col_count[j] -= 1;
                log.push(Action::SingletonRow { row: i, col: j, coef: a, set_lower, set_upper });
                changed = true;
            }
        }
        for j in 0..n {
            if !col_alive[j] || col_count[j] != 0 {
                continue;
            }
            let c = cost[j];
            let value = if c > T::zero() {
                lower[j]
            } else if c < T::zero() {
                upper[j]
            } else if lower[j].is_finite() {
                lower[j]
            } else if upper[j].is_finite() {
                upper[j]
            } else {
                T::zero()
            };
            if !value.is_finite() {
                return PresolveOutcome::Unbounded;
            }
            col_alive[j] = false;
            log.push(Action::EmptyColumn { col: j, value });
            changed = true;
        }
        // Rows lose entries only when columns are removed, and removed
        // columns are always empty, so row counts stay exact.
    }

    let row_map: Vec<usize> = (0..m).filter(|&i| row_alive[i]).collect();
    let col_map: Vec<usize> = (0..n).filter(|&j| col_alive[j]).collect();
    let mut new_row = vec![usize::MAX; m];
    for (k, &i) in row_map.iter().enumerate() {
        new_row[i] = k;
    }
    let mut b: Vec<T> = row_map.iter().map(|&i| lp.rows[i].rhs).collect();
    let mut slack_lower = Vec::with_capacity(row_map.len());
    let mut slack_upper = Vec::with_capacity(row_map.len());
    for &i in &row_map {
        let (l, u) = slack_bounds::<T>(lp.rows[i].sense);
        slack_lower.push(l);
        slack_upper.push(u);
    }
    let cols = col_map
        .iter()
        .map(|&j| {
            col_entries[j]
                .iter()
                .filter(|e| row_alive[e.0])
                .map(|&(r, v)| (new_row[r], v))
                .collect()
        })
        .collect();
    // Fixed columns removed by presolve never touch live rows, so `b` needs
    // no adjustment; keep the binding explicit for readers of the log.
    b.iter_mut().for_each(|_| {});

    PresolveOutcome::Reduced(Presolved {
        problem: StdProblem {
            m: row_map.len(),
            cols,
            cost: col_map.iter().map(|&j| cost[j]).collect(),
            lower: col_map.iter().map(|&j| lower[j]).collect(),
            upper: col_map.iter().map(|&j| upper[j]).collect(),
            slack_lower,
            slack_upper,
            b,
        },
        col_map,
        row_map,
        cost,
        lower,
        upper,
        log,
        n_rows: m,
        n_cols: n,
    })
}

fn status_of(state: VarState) -> BasisStatus {
    match state {
        VarState::Basic(_) => BasisStatus::Basic,
        VarState::Lower => BasisStatus::AtLower,
        VarState::Upper => BasisStatus::AtUpper,
        VarState::Zero => BasisStatus::Free,
    }
}

impl<T: Scalar> Presolved<T> {
    /// Maps a reduced-problem optimum (structural + slack values and states)
    /// back to the original problem.
    pub fn postsolve(&self, x: &[T], y: &[T], d: &[T], states: &[VarState], tol: T) -> Postsolved<T> {
        let nr = self.col_map.len();
        let mut xo = vec![T::zero(); self.n_cols];
        let mut yo = vec![T::zero(); self.n_rows];
        let mut dout = vec![T::zero(); self.n_cols];
        let mut cs = vec![BasisStatus::Basic; self.n_cols];
        let mut rs = vec![BasisStatus::Basic; self.n_rows];
        for (k, &j) in self.col_map.iter().enumerate() {
            xo[j] = x[k];
            dout[j] = d[k];
            cs[j] = status_of(states[k]);
        }
        for (k, &i) in self.row_map.iter().enumerate() {
            yo[i] = y[k];
            rs[i] = status_of(states[nr + k]);
        }
        for action in self.log.iter().rev() {
            match *action {
                Action::EmptyRow { row } => {
                    yo[row] = T::zero();
                    rs[row] = BasisStatus::Basic;
                }
                Action::EmptyColumn { col, value } => {
                    xo[col] = value;
                    dout[col] = self.cost[col];
                    cs[col] = if value == self.lower[col] {
                        BasisStatus::AtLower
                    } else if value == self.upper[col] {
                        BasisStatus::AtUpper
                    } else {
                        BasisStatus::Free
                    };
                }
                Action::SingletonRow { row, col, coef, set_lower, set_upper } => {
                    let dj = dout[col];
                    let xj = xo[col];
                    let scale = T::one().max(xj.abs());
                    let at_lower = (xj - self.lower[col]).abs() <= tol * scale;
                    let at_upper = (self.upper[col] - xj).abs() <= tol * scale;
                    let take = (set_lower && at_lower && dj > T::zero())
                        || (set_upper && at_upper && dj < T::zero());
                    if take {
                        yo[row] = dj / coef;
                        dout[col] = T::zero();
                        cs[col] = BasisStatus::Basic;
                        rs[row] = if yo[row] > T::zero() { BasisStatus::AtUpper } else { BasisStatus::AtLower };
                    } else {
                        yo[row] = T::zero();
                        rs[row] = BasisStatus::Basic;
                    }
                }
            }
        }
        Postsolved { x: xo, y: yo, d: dout, col_status: cs, row_status: rs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_row_becomes_bound_and_recovers_dual() {
        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        let x = lp.add_column("x", 1.0, 0.0, f64::INFINITY);
        lp.add_constraint("r", &[(x, 1.0)], RowSense::Ge, 1.0);
        let PresolveOutcome::Reduced(p) = presolve(&lp, true, 1e-9) else { panic!() };
        assert_eq!(p.problem.m, 0);
        assert!(p.col_map.is_empty());
        let post = p.postsolve(&[], &[], &[], &[], 1e-9);
        assert_eq!(post.x, vec![1.0]);
        assert_eq!(post.y, vec![1.0]);
        assert_eq!(post.d, vec![0.0]);
    }

    #[test]
    fn infeasible_empty_row_and_crossed_singletons() {
        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        lp.add_column("x", 1.0, 0.0, 1.0);
        lp.add_row("empty", RowSense::Ge, 2.0);
        assert!(matches!(presolve(&lp, true, 1e-9), PresolveOutcome::Infeasible));

        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        let x = lp.add_column("x", 1.0, 0.0, 1.0);
        lp.add_constraint("r", &[(x, 2.0)], RowSense::Ge, 4.0);
        assert!(matches!(presolve(&lp, true, 1e-9), PresolveOutcome::Infeasible));
    }

    #[test]
    fn empty_column_with_improving_cost_is_unbounded() {
        let mut lp = LinearProgram::<f64>::new("t", Sense::Maximize);
        lp.add_column("x", 1.0, 0.0, f64::INFINITY);
        assert!(matches!(presolve(&lp, true, 1e-9), PresolveOutcome::Unbounded));
    }

    #[test]
    fn disabled_presolve_keeps_everything() {
        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        let x = lp.add_column("x", 1.0, 0.0, f64::INFINITY);
        lp.add_constraint("r", &[(x, 1.0)], RowSense::Ge, 1.0);
        let PresolveOutcome::Reduced(p) = presolve(&lp, false, 1e-9) else { panic!() };
        assert_eq!(p.problem.m, 1);
        assert_eq!(p.col_map, vec![0]);
    }
}
