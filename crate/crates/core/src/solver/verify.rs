//! Independent checks of a reported solution and of infeasibility or
//! unboundedness certificates. All arithmetic is done in `f64` straight from
//! the model, without reusing anything from the solve path.

use std::fmt;

use crate::scalar::Scalar;
use crate::solver::lp::{LinearProgram, RowSense, Sense};
use crate::solver::{dual_orientation, SolveResult, SolveStatus};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NotOptimal,
    Dimension,
    NonFinite,
    Bound,
    RowResidual,
    DualSign,
    ReducedCost,
    ComplementarySlackness,
    Objective,
    DualityGap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Row or column name, or a short description for global checks.
    pub subject: String,
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {:e}", self.kind, self.subject, self.amount)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    /// Largest row or bound violation.
    pub primal_residual: f64,
    /// Largest gap between reported and recomputed reduced costs.
    pub dual_residual: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|primal - dual| / (1 + |primal|)`.
    pub relative_gap: f64,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_solution<T: Scalar>(lp: &LinearProgram<T>, result: &SolveResult<T>) -> VerificationReport {
    verify_solution_with(lp, result, DEFAULT_TOLERANCE)
}

/// Checks primal feasibility, dual feasibility, complementary slackness and
/// strong duality of an optimal `result` with relative tolerance `tol`.
pub fn verify_solution_with<T: Scalar>(lp: &LinearProgram<T>, result: &SolveResult<T>, tol: f64) -> VerificationReport {
    let mut rep = VerificationReport::default();
    let flag = |rep: &mut VerificationReport, kind, subject: &str, amount: f64| {
        rep.violations.push(Violation { kind, subject: subject.to_string(), amount });
    };
    if result.status != SolveStatus::Optimal {
        flag(&mut rep, ViolationKind::NotOptimal, "status", f64::NAN);
        return rep;
    }
    let n = lp.num_cols();
    let m = lp.num_rows();
    if result.primal.len() != n || result.reduced_costs.len() != n || result.dual.len() != m {
        flag(&mut rep, ViolationKind::Dimension, "solution vectors", f64::NAN);
        return rep;
    }
    let f = |v: T| v.to_f64_lossless();
    let x: Vec<f64> = result.primal.iter().map(|&v| f(v)).collect();
    let sign = if lp.sense == Sense::Maximize { -1.0 } else { 1.0 };
    // Right-hand-side sensitivities in minimization form.
    let pi: Vec<f64> = result
        .dual
        .iter()
        .zip(&lp.rows)
        .map(|(&v, r)| sign * f(v) * dual_orientation::<f64>(lp.sense, r.sense))
        .collect();
    if x.iter().chain(&pi).any(|v| !v.is_finite()) {
        flag(&mut rep, ViolationKind::NonFinite, "solution vectors", f64::NAN);
        return rep;
    }

    let b_norm = lp.rows.iter().fold(0.0f64, |a, r| a.max(f(r.rhs).abs()));
    let primal_tol = tol * (1.0 + b_norm);
    let mut act = vec![0.0f64; m];
    let mut d: Vec<f64> = lp.columns.iter().map(|c| sign * f(c.cost)).collect();
    for &(r, c, v) in &lp.entries {
        act[r] += f(v) * x[c];
        d[c] -= f(v) * pi[r];
    }
    let cost_norm = lp.columns.iter().fold(0.0f64, |a, c| a.max(f(c.cost).abs()));
    let dual_tol = tol * (1.0 + cost_norm);

    for (j, col) in lp.columns.iter().enumerate() {
        let (l, u) = (f(col.lower), f(col.upper));
        let viol = (l - x[j]).max(x[j] - u).max(0.0);
        rep.primal_residual = rep.primal_residual.max(viol);
        if viol > tol * (1.0 + l.abs().min(u.abs()).min(1e300)) {
            flag(&mut rep, ViolationKind::Bound, &col.name, viol);
        }
        let reported = sign * f(result.reduced_costs[j]);
        let mismatch = (reported - d[j]).abs();
        rep.dual_residual = rep.dual_residual.max(mismatch);
        if mismatch > dual_tol {
            flag(&mut rep, ViolationKind::ReducedCost, &col.name, mismatch);
        }
        let at_lower = l.is_finite() && (x[j] - l).abs() <= primal_tol;
        let at_upper = u.is_finite() && (u - x[j]).abs() <= primal_tol;
        let wrong_sign = match (at_lower, at_upper) {
            (true, true) => 0.0,
            (true, false) => (-d[j]).max(0.0),
            (false, true) => d[j].max(0.0),
            (false, false) => d[j].abs(),
        };
        if wrong_sign > dual_tol {
            flag(&mut rep, ViolationKind::DualSign, &col.name, wrong_sign);
        }
        let gap_to_bound = (x[j] - l).abs().min((u - x[j]).abs());
        let product = if gap_to_bound.is_finite() { (d[j] * gap_to_bound).abs() } else { 0.0 };
        if product > tol * (1.0 + x[j].abs()) * (1.0 + cost_norm) && !(at_lower || at_upper) {
            flag(&mut rep, ViolationKind::ComplementarySlackness, &col.name, product);
        }
    }

    let mut dual_obj = lp.rows.iter().zip(&pi).map(|(r, &p)| f(r.rhs) * p).sum::<f64>();
    for (j, col) in lp.columns.iter().enumerate() {
        let (l, u) = (f(col.lower), f(col.upper));
        // A dual-infeasible reduced cost on an infinite bound has already
        // been flagged above; charge it against the nearest finite bound.
        let bound = if d[j] > 0.0 {
            if l.is_finite() { l } else { x[j] }
        } else if u.is_finite() {
            u
        } else {
            x[j]
        };
        dual_obj += d[j] * bound;
    }
    dual_obj += sign * f(lp.objective_offset);

    for (i, row) in lp.rows.iter().enumerate() {
        let rhs = f(row.rhs);
        let slack = rhs - act[i];
        let viol = match row.sense {
            RowSense::Le => -slack,
            RowSense::Ge => slack,
            RowSense::Eq => slack.abs(),
        }
        .max(0.0);
        rep.primal_residual = rep.primal_residual.max(viol);
        if viol > primal_tol {
            flag(&mut rep, ViolationKind::RowResidual, &row.name, viol);
        }
        let wrong_sign = match row.sense {
            RowSense::Le => pi[i].max(0.0),
            RowSense::Ge => (-pi[i]).max(0.0),
            RowSense::Eq => 0.0,
        };
        if wrong_sign > dual_tol {
            flag(&mut rep, ViolationKind::DualSign, &row.name, wrong_sign);
        }
        let product = (pi[i] * slack).abs();
        if row.sense != RowSense::Eq && product > tol * (1.0 + rhs.abs()) * (1.0 + cost_norm) {
            flag(&mut rep, ViolationKind::ComplementarySlackness, &row.name, product);
        }
    }

    let primal_obj = sign * lp.columns.iter().zip(&x).map(|(c, &v)| f(c.cost) * v).sum::<f64>()
        + sign * f(lp.objective_offset);
    let reported = sign * f(result.objective);
    if (reported - primal_obj).abs() > tol * (1.0 + primal_obj.abs()) {
        flag(&mut rep, ViolationKind::Objective, "objective", (reported - primal_obj).abs());
    }
    rep.primal_objective = sign * primal_obj;
    rep.dual_objective = sign * dual_obj;
    rep.relative_gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs());
    if rep.relative_gap > tol {
        let gap = rep.relative_gap;
        flag(&mut rep, ViolationKind::DualityGap, "objective", gap);
    }
    rep
}

fn box_range(coef: f64, lo: f64, hi: f64) -> (f64, f64) {
    if coef == 0.0 {
        return (0.0, 0.0);
    }
    let (a, b) = (coef * lo, coef * hi);
    let a = if a.is_nan() { 0.0 } else { a };
    let b = if b.is_nan() { 0.0 } else { b };
    (a.min(b), a.max(b))
}

/// True when `y` proves that no point satisfies the rows and column bounds:
/// `y^T b` lies strictly outside the range of `y^T (A x + s)`.
pub fn check_farkas<T: Scalar>(lp: &LinearProgram<T>, y: &[T], tol: f64) -> bool {
    if y.len() != lp.num_rows() {
        return false;
    }
    let y: Vec<f64> = y.iter().map(|v| v.to_f64_lossless()).collect();
    let mut ya = vec![0.0f64; lp.num_cols()];
    for &(r, c, v) in &lp.entries {
        ya[c] += y[r] * v.to_f64_lossless();
    }
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut scale = 0.0f64;
    for (col, &a) in lp.columns.iter().zip(&ya) {
        let (l, h) = box_range(a, col.lower.to_f64_lossless(), col.upper.to_f64_lossless());
        lo += l;
        hi += h;
        scale = scale.max(l.abs().min(1e300)).max(h.abs().min(1e300));
    }
    let mut yb = 0.0;
    for (row, &yi) in lp.rows.iter().zip(&y) {
        // Row activity is `b - s` with the slack in its sense-dependent range.
        let (sl, su) = match row.sense {
            RowSense::Le => (0.0, f64::INFINITY),
            RowSense::Ge => (f64::NEG_INFINITY, 0.0),
            RowSense::Eq => (0.0, 0.0),
        };
        let (l, h) = box_range(yi, sl, su);
        lo += l;
        hi += h;
        yb += yi * row.rhs.to_f64_lossless();
        scale = scale.max(yb.abs());
    }
    let margin = tol * (1.0 + scale);
    yb > hi + margin || yb < lo - margin
}

/// True when `dir` is a feasible direction of strict objective improvement.
pub fn check_ray<T: Scalar>(lp: &LinearProgram<T>, dir: &[T], tol: f64) -> bool {
    if dir.len() != lp.num_cols() {
        return false;
    }
    let d: Vec<f64> = dir.iter().map(|v| v.to_f64_lossless()).collect();
    let norm = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if norm == 0.0 || !norm.is_finite() {
        return false;
    }
    let eps = tol * norm;
    for (col, &v) in lp.columns.iter().zip(&d) {
        if (col.lower.is_finite() && v < -eps) || (col.upper.is_finite() && v > eps) {
            return false;
        }
    }
    let mut act = vec![0.0f64; lp.num_rows()];
    for &(r, c, v) in &lp.entries {
        act[r] += v.to_f64_lossless() * d[c];
    }
    for (row, &a) in lp.rows.iter().zip(&act) {
        let ok = match row.sense {
            RowSense::Le => a <= eps,
            RowSense::Ge => a >= -eps,
            RowSense::Eq => a.abs() <= eps,
        };
        if !ok {
            return false;
        }
    }
    let gain: f64 = lp.columns.iter().zip(&d).map(|(c, &v)| c.cost.to_f64_lossless() * v).sum();
    match lp.sense {
        Sense::Minimize => gain < -eps,
        Sense::Maximize => gain > eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve, SolverOptions};

    fn sample() -> LinearProgram<f64> {
        let mut lp = LinearProgram::new("t", Sense::Minimize);
        let x = lp.add_column("x", 2.0, 0.0, 10.0);
        let y = lp.add_column("y", 3.0, 1.0, f64::INFINITY);
        let z = lp.add_column("z", -1.0, f64::NEG_INFINITY, 4.0);
        lp.add_constraint("a", &[(x, 1.0), (y, 1.0)], RowSense::Ge, 5.0);
        lp.add_constraint("b", &[(x, 1.0), (z, -2.0)], RowSense::Le, 3.0);
        lp.add_constraint("c", &[(y, 1.0), (z, 1.0)], RowSense::Eq, 6.0);
        lp
    }

    #[test]
    fn solver_output_is_clean() {
        let lp = sample();
        let r = solve(&lp, &SolverOptions::default()).unwrap();
        let rep = verify_solution(&lp, &r);
        assert!(rep.is_clean(), "{:?}", rep.violations);
    }

    #[test]
    fn corrupted_primal_is_flagged() {
        let lp = sample();
        let mut r = solve(&lp, &SolverOptions::default()).unwrap();
        r.primal[1] += 1.0;
        let rep = verify_solution(&lp, &r);
        assert!(rep.violations.iter().any(|v| v.kind == ViolationKind::RowResidual));
    }

    #[test]
    fn wrong_status_and_shapes_do_not_panic() {
        let lp = sample();
        let mut r = solve(&lp, &SolverOptions::default()).unwrap();
        r.dual.pop();
        assert_eq!(verify_solution(&lp, &r).violations[0].kind, ViolationKind::Dimension);
        r.status = SolveStatus::Infeasible;
        assert_eq!(verify_solution(&lp, &r).violations[0].kind, ViolationKind::NotOptimal);
    }

    #[test]
    fn flipped_dual_breaks_the_gap() {
        let lp = sample();
        let mut r = solve(&lp, &SolverOptions::default()).unwrap();
        for v in &mut r.dual {
            *v = -*v - 1.0;
        }
        assert!(!verify_solution(&lp, &r).is_clean());
    }
}
