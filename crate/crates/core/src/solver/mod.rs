//! Sparse linear programming: model container, presolve, scaling, a bounded
//! primal simplex, MPS exchange and independent solution verification.

pub mod lp;
mod lu;
pub mod mps;
mod presolve;
mod scaling;
mod simplex;
pub mod solution_io;
pub mod verify;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;
pub use lp::{Column, LinearProgram, LpError, Row, RowSense, Sense};
use presolve::PresolveOutcome;
use scaling::Scaling;
use simplex::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Largest reduced cost relative to its Devex reference weight, with the
    /// same degenerate fallback as `Dantzig`.
    #[default]
    Devex,
    /// Most negative reduced cost, with an automatic switch to Bland's rule
    /// during long degenerate stretches.
    Dantzig,
    /// Lowest-index entering and leaving variable throughout.
    Bland,
}

impl FromStr for PivotRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "devex" => Ok(Self::Devex),
            "dantzig" => Ok(Self::Dantzig),
            "bland" => Ok(Self::Bland),
            other => Err(format!("unknown pivot rule `{other}` (expected devex, dantzig or bland)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions<T> {
    pub max_iters: usize,
    /// Primal feasibility tolerance.
    pub tol_feas: T,
    /// Reduced-cost optimality tolerance.
    pub tol_opt: T,
    /// Smallest admissible pivot magnitude, relative to the column scale.
    pub pivot_tol: T,
    pub pivot: PivotRule,
    pub presolve: bool,
    pub scaling: bool,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        let hundred = T::lit(100.0);
        Self {
            max_iters: 1_000_000,
            tol_feas: T::lit(1e-7).max(hundred * eps),
            tol_opt: T::lit(1e-8).max(hundred * eps),
            pivot_tol: T::lit(1e-11).max(T::lit(1000.0) * eps),
            pivot: PivotRule::Devex,
            presolve: true,
            scaling: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid model: {0}")]
    InvalidModel(#[from] LpError),
    #[error("numerical breakdown: {diagnostics}")]
    NumericalBreakdown { diagnostics: String },
    #[error("iteration limit reached after {iterations} iterations")]
    IterationLimit { iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::Infeasible => "infeasible",
            Self::Unbounded => "unbounded",
        })
    }
}

/// Status of a column or of a row's slack in the final basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisStatus {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable at zero.
    Free,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate<T> {
    /// Row multipliers `y` with `y^T b` outside the range that `y^T A x`
    /// can reach over the column bounds and row senses.
    Farkas { row_multipliers: Vec<T> },
    /// Direction of unbounded improvement over the original columns.
    Ray { direction: Vec<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub status: SolveStatus,
    /// Objective including the constant offset; NaN unless optimal.
    pub objective: T,
    pub primal: Vec<T>,
    /// Row duals: objective improvement per unit relaxation for inequality
    /// rows, objective change per unit right-hand side for equality rows.
    /// [`dual_orientation`] converts to plain right-hand-side sensitivities.
    pub dual: Vec<T>,
    /// `c - A^T p` for every column, where `p` holds the right-hand-side
    /// sensitivities of the objective.
    pub reduced_costs: Vec<T>,
    pub iterations: usize,
    pub column_status: Vec<BasisStatus>,
    pub row_status: Vec<BasisStatus>,
    pub certificate: Option<Certificate<T>>,
}

impl<T: Scalar> SolveResult<T> {
    fn non_optimal(lp: &LinearProgram<T>, status: SolveStatus, iterations: usize, cert: Certificate<T>) -> Self {
        Self {
            status,
            objective: T::nan(),
            primal: vec![T::nan(); lp.num_cols()],
            dual: vec![T::nan(); lp.num_rows()],
            reduced_costs: vec![T::nan(); lp.num_cols()],
            iterations,
            column_status: vec![BasisStatus::Basic; lp.num_cols()],
            row_status: vec![BasisStatus::Basic; lp.num_rows()],
            certificate: Some(cert),
        }
    }
}

/// Factor `s` with `dual = s * d(objective)/d(rhs)` for a row of the given
/// sense. Under this convention binding inequality rows always carry a
/// non-negative dual at an optimum.
pub fn dual_orientation<T: Scalar>(sense: Sense, row: RowSense) -> T {
    match (sense, row) {
        (_, RowSense::Eq) | (Sense::Minimize, RowSense::Ge) | (Sense::Maximize, RowSense::Le) => T::one(),
        _ => -T::one(),
    }
}

/// Solves `lp` to optimality or proves it infeasible or unbounded.
pub fn solve<T: Scalar>(lp: &LinearProgram<T>, opts: &SolverOptions<T>) -> Result<SolveResult<T>, SolverError> {
    lp.validate()?;
    let reduced = match presolve::presolve(lp, opts.presolve, opts.tol_feas) {
        PresolveOutcome::Reduced(p) => p,
        // Re-solve without reductions so the certificate refers to the
        // untouched model.
        PresolveOutcome::Infeasible | PresolveOutcome::Unbounded => {
            let plain = SolverOptions { presolve: false, ..opts.clone() };
            return solve(lp, &plain);
        }
    };
    let scaling = if opts.scaling {
        Scaling::compute(&reduced.problem)
    } else {
        Scaling::identity(reduced.problem.m, reduced.problem.cols.len())
    };
    let scaled = scaling.apply(&reduced.problem);
    let run = simplex::solve_std(&scaled, opts)?;
    let nr = reduced.col_map.len();
    let sign = if lp.sense == Sense::Maximize { -T::one() } else { T::one() };

    match run.outcome {
        Outcome::Optimal { x, y, d, states } => {
            let xs: Vec<T> = x[..nr].iter().zip(&scaling.col).map(|(&v, &s)| v * s).collect();
            let ys: Vec<T> = y.iter().zip(&scaling.row).map(|(&v, &s)| v * s).collect();
            let ds: Vec<T> = d[..nr].iter().zip(&scaling.col).map(|(&v, &s)| v / s).collect();
            let post = reduced.postsolve(&xs, &ys, &ds, &states, opts.tol_feas);
            let mut primal = post.x;
            // Snap values that drifted marginally outside their bounds.
            for (v, c) in primal.iter_mut().zip(&lp.columns) {
                *v = v.max(c.lower).min(c.upper);
            }
            let result = SolveResult {
                status: SolveStatus::Optimal,
                objective: lp.objective_value(&primal),
                primal,
                dual: post
                    .y
                    .into_iter()
                    .zip(&lp.rows)
                    .map(|(v, row)| v * sign * dual_orientation::<T>(lp.sense, row.sense))
                    .collect(),
                reduced_costs: post.d.into_iter().map(|v| v * sign).collect(),
                iterations: run.iterations,
                column_status: post.col_status,
                row_status: post.row_status,
                certificate: None,
            };
            check_primal(lp, &result.primal, opts)?;
            Ok(result)
        }
        Outcome::Infeasible { farkas } => {
            let mut y = vec![T::zero(); lp.num_rows()];
            for (k, &i) in reduced.row_map.iter().enumerate() {
                y[i] = farkas[k] * scaling.row[k];
            }
            Ok(SolveResult::non_optimal(
                lp,
                SolveStatus::Infeasible,
                run.iterations,
                Certificate::Farkas { row_multipliers: y },
            ))
        }
        Outcome::Unbounded { ray } => {
            let mut dir = vec![T::zero(); lp.num_cols()];
            for (k, &j) in reduced.col_map.iter().enumerate() {
                dir[j] = ray[k] * scaling.col[k];
            }
            Ok(SolveResult::non_optimal(
                lp,
                SolveStatus::Unbounded,
                run.iterations,
                Certificate::Ray { direction: dir },
            ))
        }
    }
}

fn check_primal<T: Scalar>(lp: &LinearProgram<T>, x: &[T], opts: &SolverOptions<T>) -> Result<(), SolverError> {
    let act = lp.row_activity(x);
    let loose = opts.tol_feas * T::lit(1000.0);
    let mut worst = T::zero();
    let mut worst_row = None;
    for (i, (row, &a)) in lp.rows.iter().zip(&act).enumerate() {
        let viol = match row.sense {
            RowSense::Le => a - row.rhs,
            RowSense::Ge => row.rhs - a,
            RowSense::Eq => (a - row.rhs).abs(),
        };
        let rel = viol / (T::one() + row.rhs.abs());
        if rel > worst {
            worst = rel;
            worst_row = Some(i);
        }
    }
    match worst_row {
        Some(i) if worst > loose => Err(SolverError::NumericalBreakdown {
            diagnostics: format!("row `{}` violated by relative {} after unscaling", lp.rows[i].name, worst),
        }),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var() -> LinearProgram<f64> {
        // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 7, x <= 3
        let mut lp = LinearProgram::new("t", Sense::Maximize);
        let x = lp.add_column("x", 3.0, 0.0, 3.0);
        let y = lp.add_column("y", 2.0, 0.0, f64::INFINITY);
        lp.add_constraint("a", &[(x, 1.0), (y, 1.0)], RowSense::Le, 4.0);
        lp.add_constraint("b", &[(x, 1.0), (y, 3.0)], RowSense::Le, 7.0);
        lp
    }

    #[test]
    fn solves_small_maximization_with_sensitivities() {
        for pivot in [PivotRule::Devex, PivotRule::Dantzig, PivotRule::Bland] {
            for scaling in [false, true] {
                let opts = SolverOptions { pivot, scaling, ..Default::default() };
                let r = solve(&two_var(), &opts).unwrap();
                assert_eq!(r.status, SolveStatus::Optimal);
                assert!((r.objective - 11.0).abs() < 1e-9);
                assert!((r.primal[0] - 3.0).abs() < 1e-9);
                assert!((r.primal[1] - 1.0).abs() < 1e-9);
                // Raising the first capacity by one adds one unit of y.
                assert!((r.dual[0] - 2.0).abs() < 1e-9);
                assert!(r.dual[1].abs() < 1e-9);
                assert!((r.reduced_costs[0] - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn single_lower_row() {
        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        let x = lp.add_column("x", 1.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_constraint("r", &[(x, 1.0)], RowSense::Ge, 1.0);
        for presolve in [false, true] {
            let r = solve(&lp, &SolverOptions { presolve, ..Default::default() }).unwrap();
            assert_eq!(r.objective, 1.0);
            assert_eq!(r.primal, vec![1.0]);
            assert_eq!(r.dual, vec![1.0]);
        }
    }

    #[test]
    fn degenerate_face_reports_objective_and_dual() {
        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        let x = lp.add_column("x", -1.0, 0.0, 1.0);
        let y = lp.add_column("y", -1.0, 0.0, 1.0);
        lp.add_constraint("r", &[(x, 1.0), (y, 1.0)], RowSense::Le, 1.0);
        let r = solve(&lp, &SolverOptions::default()).unwrap();
        assert!((r.objective + 1.0).abs() < 1e-12);
        assert!((r.dual[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // min x + 2y  s.t. x + y = 3, x - y >= -1, y >= 0, x in [0, 1]
        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        let x = lp.add_column("x", 1.0, 0.0, 1.0);
        let y = lp.add_column("y", 2.0, 0.0, f64::INFINITY);
        lp.add_constraint("e", &[(x, 1.0), (y, 1.0)], RowSense::Eq, 3.0);
        lp.add_constraint("g", &[(x, 1.0), (y, -1.0)], RowSense::Ge, -5.0);
        let r = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 5.0).abs() < 1e-9);
        assert!((r.dual[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded_come_with_certificates() {
        let mut lp = LinearProgram::<f64>::new("t", Sense::Minimize);
        let x = lp.add_column("x", 1.0, 0.0, f64::INFINITY);
        let y = lp.add_column("y", 1.0, 0.0, f64::INFINITY);
        lp.add_constraint("a", &[(x, 1.0), (y, 1.0)], RowSense::Le, 1.0);
        lp.add_constraint("b", &[(x, 1.0), (y, 1.0)], RowSense::Ge, 2.0);
        let r = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert!(r.objective.is_nan());
        let Some(Certificate::Farkas { row_multipliers }) = &r.certificate else { panic!() };
        assert!(verify::check_farkas(&lp, row_multipliers, 1e-9));

        let mut lp = LinearProgram::<f64>::new("t", Sense::Maximize);
        let x = lp.add_column("x", 1.0, 0.0, f64::INFINITY);
        let y = lp.add_column("y", 0.0, 0.0, f64::INFINITY);
        lp.add_constraint("a", &[(x, 1.0), (y, -1.0)], RowSense::Le, 1.0);
        let r = solve(&lp, &SolverOptions::default()).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded);
        let Some(Certificate::Ray { direction }) = &r.certificate else { panic!() };
        assert!(verify::check_ray(&lp, direction, 1e-9));
    }

    #[test]
    fn single_precision_solves_too() {
        let mut lp = LinearProgram::<f32>::new("t", Sense::Maximize);
        let x = lp.add_column("x", 3.0, 0.0, 3.0);
        let y = lp.add_column("y", 2.0, 0.0, f32::INFINITY);
        lp.add_constraint("a", &[(x, 1.0), (y, 1.0)], RowSense::Le, 4.0);
        lp.add_constraint("b", &[(x, 1.0), (y, 3.0)], RowSense::Le, 6.0);
        let r = solve(&lp, &SolverOptions::default()).unwrap();
        assert!((r.objective - 11.0).abs() < 1e-4);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let mut lp = two_var();
        lp.columns[1].name = "x".into();
        assert!(matches!(solve(&lp, &SolverOptions::default()), Err(SolverError::InvalidModel(_))));
    }

    #[test]
    fn pivot_rule_parses() {
        assert_eq!("Bland".parse::<PivotRule>().unwrap(), PivotRule::Bland);
        assert!("steepest".parse::<PivotRule>().is_err());
    }
}
