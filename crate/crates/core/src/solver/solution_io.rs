//! Exchange of solutions with external solvers.
//!
//! `solution.csv` has the header `name,value` and one line per column;
//! `duals.csv` has the header `name,dual` and one line per row. Every column
//! and row of the model must appear exactly once. Duals are read in the
//! convention selected by [`DualConvention`].

use std::collections::HashMap;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::solver::lp::LinearProgram;
use crate::solver::{dual_orientation, BasisStatus, SolveResult, SolveStatus};

#[derive(Debug, Error)]
pub enum SolutionIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{file}: expected header `{expected}`")]
    Header { file: String, expected: String },
    #[error("{file}: unknown name `{name}`")]
    UnknownName { file: String, name: String },
    #[error("{file}: `{name}` listed twice")]
    Duplicate { file: String, name: String },
    #[error("{file}: `{name}` missing")]
    Missing { file: String, name: String },
    #[error("{file}: bad number `{value}` for `{name}`")]
    BadNumber { file: String, name: String, value: String },
}

/// Sign convention of imported row duals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DualConvention {
    /// The convention of [`SolveResult::dual`].
    #[default]
    Native,
    /// Plain derivative of the objective with respect to the right-hand
    /// side, as reported by most commercial solvers.
    RhsSensitivity,
}

fn read_pairs(path: &Path, value_header: &str, names: &[&str]) -> Result<Vec<f64>, SolutionIoError> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "name" || &headers[1] != value_header {
        return Err(SolutionIoError::Header { file, expected: format!("name,{value_header}") });
    }
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut values = vec![None; names.len()];
    for rec in rdr.records() {
        let rec = rec?;
        let name = rec[0].trim();
        let &i = index
            .get(name)
            .ok_or_else(|| SolutionIoError::UnknownName { file: file.clone(), name: name.into() })?;
        let raw = rec[1].trim();
        let v: f64 = raw.parse().map_err(|_| SolutionIoError::BadNumber {
            file: file.clone(),
            name: name.into(),
            value: raw.into(),
        })?;
        if values[i].replace(v).is_some() {
            return Err(SolutionIoError::Duplicate { file, name: name.into() });
        }
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| SolutionIoError::Missing { file: file.clone(), name: names[i].into() }))
        .collect()
}

/// Loads an externally computed optimum as a [`SolveResult`]. Reduced
/// costs are recomputed from the model; basis statuses are inferred from
/// the primal values.
pub fn read_solution<T: Scalar>(
    lp: &LinearProgram<T>,
    solution: &Path,
    duals: &Path,
    convention: DualConvention,
) -> Result<SolveResult<T>, SolutionIoError> {
    let col_names: Vec<&str> = lp.columns.iter().map(|c| c.name.as_str()).collect();
    let row_names: Vec<&str> = lp.rows.iter().map(|r| r.name.as_str()).collect();
    let primal: Vec<T> = read_pairs(solution, "value", &col_names)?.into_iter().map(T::lit).collect();
    let mut dual: Vec<T> = read_pairs(duals, "dual", &row_names)?.into_iter().map(T::lit).collect();
    if convention == DualConvention::RhsSensitivity {
        for (d, row) in dual.iter_mut().zip(&lp.rows) {
            *d *= dual_orientation::<T>(lp.sense, row.sense);
        }
    }
    let mut reduced_costs: Vec<T> = lp.columns.iter().map(|c| c.cost).collect();
    for &(r, c, v) in &lp.entries {
        let pi = dual[r] * dual_orientation::<T>(lp.sense, lp.rows[r].sense);
        reduced_costs[c] -= v * pi;
    }
    let column_status = lp
        .columns
        .iter()
        .zip(&primal)
        .map(|(c, &x)| {
            if x == c.lower {
                BasisStatus::AtLower
            } else if x == c.upper {
                BasisStatus::AtUpper
            } else {
                BasisStatus::Basic
            }
        })
        .collect();
    let act = lp.row_activity(&primal);
    let row_status = lp
        .rows
        .iter()
        .zip(&act)
        .map(|(r, &a)| if a == r.rhs { BasisStatus::AtLower } else { BasisStatus::Basic })
        .collect();
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        objective: lp.objective_value(&primal),
        primal,
        dual,
        reduced_costs,
        iterations: 0,
        column_status,
        row_status,
        certificate: None,
    })
}

/// Writes `solution.csv` and `duals.csv` into `dir`.
pub fn write_solution<T: Scalar>(lp: &LinearProgram<T>, result: &SolveResult<T>, dir: &Path) -> Result<(), SolutionIoError> {
    let mut w = csv::Writer::from_path(dir.join("solution.csv"))?;
    w.write_record(["name", "value"])?;
    for (c, v) in lp.columns.iter().zip(&result.primal) {
        w.write_record([c.name.as_str(), &v.to_f64_lossless().to_string()])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("duals.csv"))?;
    w.write_record(["name", "dual"])?;
    for (r, v) in lp.rows.iter().zip(&result.dual) {
        w.write_record([r.name.as_str(), &v.to_f64_lossless().to_string()])?;
    }
    w.flush()?;
    Ok(())
}
