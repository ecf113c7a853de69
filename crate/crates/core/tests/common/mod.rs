//! Brute-force vertex enumeration used as an oracle for the simplex solver.
#![allow(dead_code)]

use h2plan::solver::{LinearProgram, RowSense, Sense};
use rand::Rng;

pub enum Oracle {
    Optimal {
        /// Objective in the model's own sense, offset included.
        objective: f64,
        /// Right-hand-side sensitivities of the objective at the optimal basis.
        rhs_sensitivity: Vec<f64>,
        /// Unique optimal vertex with a unique dual solution.
        nondegenerate: bool,
    },
    Infeasible,
}

/// Random bounded LP with `m` rows (the last one caps `sum x`) and `n`
/// non-negative columns, at most two of which carry a finite upper bound.
pub fn random_lp<R: Rng>(rng: &mut R, m: usize, n: usize) -> LinearProgram<f64> {
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let mut lp = LinearProgram::new("rand", sense);
    for j in 0..n {
        let upper = if j < 2 && rng.gen_bool(0.5) { rng.gen_range(1..=6) as f64 } else { f64::INFINITY };
        let cost = rng.gen_range(-9..=9) as f64 + if rng.gen_bool(0.3) { rng.gen::<f64>() } else { 0.0 };
        lp.add_column(format!("x{j}"), cost, 0.0, upper);
    }
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
    for i in 0..m.saturating_sub(1) {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                let v = rng.gen_range(-5..=5) as f64;
                if v != 0.0 {
                    terms.push((j, v));
                }
            }
        }
        let act: f64 = terms.iter().map(|&(j, v)| v * x0[j].min(lp.columns[j].upper)).sum();
        let roll: f64 = rng.gen();
        let (row_sense, rhs) = if roll < 0.15 {
            (RowSense::Eq, act)
        } else if roll < 0.55 {
            (RowSense::Le, act + rng.gen_range(0.0..2.0))
        } else if roll < 0.95 {
            (RowSense::Ge, act - rng.gen_range(0.0..2.0))
        } else {
            // Unrelated right-hand side; may make the model infeasible.
            (RowSense::Ge, rng.gen_range(-10.0..30.0))
        };
        lp.add_constraint(format!("r{i}"), &terms, row_sense, (rhs * 4.0).round() / 4.0);
    }
    let all: Vec<(usize, f64)> = (0..n).map(|j| (j, 1.0)).collect();
    lp.add_constraint("cap", &all, RowSense::Le, rng.gen_range(3..=12) as f64);
    lp
}

fn next_combination(idx: &mut [usize], total: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < total - k + i {
            idx[i] += 1;
            for t in i + 1..k {
                idx[t] = idx[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the dense row-major `m x m` system in `a`, in place; returns
/// false when singular.
fn gauss(m: usize, a: &mut [f64], rhs: &mut [Vec<f64>]) -> bool {
    for k in 0..m {
        let mut p = k;
        for r in k + 1..m {
            if a[r * m + k].abs() > a[p * m + k].abs() {
                p = r;
            }
        }
        if a[p * m + k].abs() < 1e-9 {
            return false;
        }
        if p != k {
            for c in 0..m {
                a.swap(p * m + c, k * m + c);
            }
            for v in rhs.iter_mut() {
                v.swap(p, k);
            }
        }
        let piv = a[k * m + k];
        for r in k + 1..m {
            let f = a[r * m + k] / piv;
            if f == 0.0 {
                continue;
            }
            for c in k..m {
                a[r * m + c] -= f * a[k * m + c];
            }
            for v in rhs.iter_mut() {
                v[r] -= f * v[k];
            }
        }
    }
    for v in rhs.iter_mut() {
        for k in (0..m).rev() {
            let mut s = v[k];
            for c in k + 1..m {
                s -= a[k * m + c] * v[c];
            }
            v[k] = s / a[k * m + k];
        }
    }
    true
}

/// Enumerates every basis of `A x + s = b` with nonbasic variables at finite
/// bounds. A basis is a set `J` of structural columns plus the slacks of all
/// rows outside an equally sized row set `R`, so each candidate vertex needs
/// only the `|J| x |J|` solve `A[R, J] x_J = b_R - A[R, N] x_N`. Requires
/// finite lower bounds on all columns and a bounded model.
pub fn enumerate(lp: &LinearProgram<f64>) -> Oracle {
    let m = lp.num_rows();
    let n = lp.num_cols();
    let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut a = vec![vec![0.0; n]; m];
    for &(r, c, v) in &lp.entries {
        a[r][c] = v;
    }
    let lower: Vec<f64> = lp.columns.iter().map(|c| c.lower).collect();
    let upper: Vec<f64> = lp.columns.iter().map(|c| c.upper).collect();
    let cost: Vec<f64> = lp.columns.iter().map(|c| sign * c.cost).collect();
    let b: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    let slack_ok = |i: usize, s: f64| {
        let tol = 1e-9 * (1.0 + b[i].abs());
        match lp.rows[i].sense {
            RowSense::Le => s >= -tol,
            RowSense::Ge => s <= tol,
            RowSense::Eq => s.abs() <= tol,
        }
    };

    struct Best {
        obj: f64,
        cols: Vec<usize>,
        rows: Vec<usize>,
        x: Vec<f64>,
    }
    let mut best: Option<Best> = None;
    let mut x = vec![0.0; n];
    let mut in_j = vec![false; n];
    let mut mat = Vec::new();
    for k in 0..=n.min(m) {
        let mut cols: Vec<usize> = (0..k).collect();
        loop {
            in_j.iter_mut().for_each(|v| *v = false);
            for &j in &cols {
                in_j[j] = true;
            }
            let flippable: Vec<usize> = (0..n).filter(|&j| !in_j[j] && upper[j].is_finite()).collect();
            for mask in 0..(1usize << flippable.len()) {
                for j in 0..n {
                    x[j] = lower[j];
                }
                for (t, &j) in flippable.iter().enumerate() {
                    if mask >> t & 1 == 1 {
                        x[j] = upper[j];
                    }
                }
                // Residual right-hand side with the basic columns at zero.
                let resid: Vec<f64> = (0..m)
                    .map(|i| b[i] - (0..n).filter(|&j| !in_j[j]).map(|j| a[i][j] * x[j]).sum::<f64>())
                    .collect();
                let mut rows: Vec<usize> = (0..k).collect();
                loop {
                    mat.clear();
                    for &i in &rows {
                        for &j in &cols {
                            mat.push(a[i][j]);
                        }
                    }
                    let mut rhs = vec![rows.iter().map(|&i| resid[i]).collect::<Vec<f64>>()];
                    if gauss(k, &mut mat, &mut rhs) {
                        let xb = &rhs[0];
                        let mut ok = cols.iter().zip(xb).all(|(&j, &v)| {
                            let tol = 1e-9 * (1.0 + v.abs());
                            v >= lower[j] - tol && v <= upper[j] + tol
                        });
                        if ok {
                            let mut xv = x.clone();
                            for (&j, &v) in cols.iter().zip(xb) {
                                xv[j] = v;
                            }
                            let mut ri = 0;
                            for i in 0..m {
                                if ri < k && rows[ri] == i {
                                    ri += 1;
                                    continue;
                                }
                                let s = b[i] - (0..n).map(|j| a[i][j] * xv[j]).sum::<f64>();
                                if !slack_ok(i, s) {
                                    ok = false;
                                    break;
                                }
                            }
                            if ok {
                                let obj: f64 = (0..n).map(|j| cost[j] * xv[j]).sum();
                                if best.as_ref().map_or(true, |bst| obj < bst.obj - 1e-12) {
                                    best = Some(Best { obj, cols: cols.clone(), rows: rows.clone(), x: xv });
                                }
                            }
                        }
                    }
                    if k == 0 || !next_combination(&mut rows, m) {
                        break;
                    }
                }
            }
            if k == 0 || !next_combination(&mut cols, n) {
                break;
            }
        }
    }

    let Some(best) = best else {
        return Oracle::Infeasible;
    };
    let k = best.cols.len();
    // Duals: zero on rows with basic slacks, A[R, J]^T pi_R = c_J elsewhere.
    let mut mt = Vec::with_capacity(k * k);
    for &j in &best.cols {
        for &i in &best.rows {
            mt.push(a[i][j]);
        }
    }
    let mut sol = vec![best.cols.iter().map(|&j| cost[j]).collect::<Vec<f64>>()];
    assert!(gauss(k, &mut mt, &mut sol), "optimal basis must be nonsingular");
    let mut pi = vec![0.0; m];
    for (t, &i) in best.rows.iter().enumerate() {
        pi[i] = sol[0][t];
    }

    let x = &best.x;
    let mut nondegenerate = true;
    for j in 0..n {
        let basic = best.cols.contains(&j);
        if basic {
            let margin = 1e-7 * (1.0 + x[j].abs());
            if !(x[j] > lower[j] + margin && x[j] < upper[j] - margin) {
                nondegenerate = false;
            }
        } else {
            let d = cost[j] - (0..m).map(|i| a[i][j] * pi[i]).sum::<f64>();
            let at_lower = x[j] == lower[j];
            if (at_lower && d <= 1e-7) || (!at_lower && d >= -1e-7) {
                nondegenerate = false;
            }
        }
    }
    for i in 0..m {
        let s = b[i] - (0..n).map(|j| a[i][j] * x[j]).sum::<f64>();
        if best.rows.contains(&i) {
            // Nonbasic slack at zero: its reduced cost is -pi_i.
            if lp.rows[i].sense != RowSense::Eq && pi[i].abs() <= 1e-7 {
                nondegenerate = false;
            }
        } else if s.abs() <= 1e-7 * (1.0 + b[i].abs()) {
            nondegenerate = false;
        }
    }
    Oracle::Optimal {
        objective: sign * best.obj + lp.objective_offset,
        rhs_sensitivity: pi.iter().map(|&p| sign * p).collect(),
        nondegenerate,
    }
}

/// Row sizes and column counts sampled for the random-LP checks.
pub fn random_shape<R: Rng>(rng: &mut R) -> (usize, usize) {
    (rng.gen_range(1..=10), rng.gen_range(1..=12))
}

pub mod instances;
