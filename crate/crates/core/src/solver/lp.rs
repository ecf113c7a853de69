use std::collections::HashSet;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column<T> {
    pub name: String,
    pub cost: T,
    pub lower: T,
    pub upper: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    pub name: String,
    pub sense: RowSense,
    pub rhs: T,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("invalid {kind} name `{name}`: names must be non-empty and free of whitespace")]
    BadName { kind: &'static str, name: String },
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    IndexOutOfRange { row: usize, col: usize, rows: usize, cols: usize },
    #[error("duplicate matrix entry ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("non-finite value in {what}")]
    NonFinite { what: String },
    #[error("column `{name}` has lower bound above upper bound")]
    CrossedBounds { name: String },
}

/// Sparse linear program in triplet form.
///
/// Column bounds may be infinite; every other number must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub name: String,
    pub sense: Sense,
    /// Constant added to the objective.
    pub objective_offset: T,
    pub columns: Vec<Column<T>>,
    pub rows: Vec<Row<T>>,
    /// `(row, column, value)` entries of the constraint matrix.
    pub entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            sense,
            objective_offset: T::zero(),
            columns: Vec::new(),
            rows: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn add_column(&mut self, name: impl Into<String>, cost: T, lower: T, upper: T) -> usize {
        self.columns.push(Column { name: name.into(), cost, lower, upper });
        self.columns.len() - 1
    }

    pub fn add_row(&mut self, name: impl Into<String>, sense: RowSense, rhs: T) -> usize {
        self.rows.push(Row { name: name.into(), sense, rhs });
        self.rows.len() - 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: T) {
        self.entries.push((row, col, value));
    }

    /// Adds a row with the given `(column, coefficient)` terms, skipping zeros.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: &[(usize, T)],
        sense: RowSense,
        rhs: T,
    ) -> usize {
        let row = self.add_row(name, sense, rhs);
        for &(col, v) in terms {
            if v != T::zero() {
                self.set(row, col, v);
            }
        }
        row
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let mut seen = HashSet::new();
        for c in &self.columns {
            check_name("column", &c.name)?;
            if !seen.insert(c.name.as_str()) {
                return Err(LpError::DuplicateName { kind: "column", name: c.name.clone() });
            }
            if !c.cost.is_finite() {
                return Err(LpError::NonFinite { what: format!("cost of `{}`", c.name) });
            }
            if c.lower.is_nan() || c.upper.is_nan() || c.lower == T::infinity() || c.upper == T::neg_infinity() {
                return Err(LpError::NonFinite { what: format!("bounds of `{}`", c.name) });
            }
            if c.lower > c.upper {
                return Err(LpError::CrossedBounds { name: c.name.clone() });
            }
        }
        let mut seen = HashSet::new();
        for r in &self.rows {
            check_name("row", &r.name)?;
            if !seen.insert(r.name.as_str()) {
                return Err(LpError::DuplicateName { kind: "row", name: r.name.clone() });
            }
            if !r.rhs.is_finite() {
                return Err(LpError::NonFinite { what: format!("rhs of `{}`", r.name) });
            }
        }
        if !self.objective_offset.is_finite() {
            return Err(LpError::NonFinite { what: "objective offset".into() });
        }
        let mut cells = HashSet::with_capacity(self.entries.len());
        for &(row, col, v) in &self.entries {
            if row >= self.rows.len() || col >= self.columns.len() {
                return Err(LpError::IndexOutOfRange {
                    row,
                    col,
                    rows: self.rows.len(),
                    cols: self.columns.len(),
                });
            }
            if !v.is_finite() {
                return Err(LpError::NonFinite { what: format!("entry ({row}, {col})") });
            }
            if !cells.insert((row, col)) {
                return Err(LpError::DuplicateEntry { row, col });
            }
        }
        Ok(())
    }

    /// Column-major copy of the matrix; entries within a column are sorted
    /// by row.
    pub fn column_entries(&self) -> Vec<Vec<(usize, T)>> {
        let mut cols = vec![Vec::new(); self.columns.len()];
        for &(r, c, v) in &self.entries {
            cols[c].push((r, v));
        }
        for col in &mut cols {
            col.sort_by_key(|e| e.0);
        }
        cols
    }

    /// Row activities `A x`.
    pub fn row_activity(&self, x: &[T]) -> Vec<T> {
        let mut act = vec![T::zero(); self.rows.len()];
        for &(r, c, v) in &self.entries {
            act[r] += v * x[c];
        }
        act
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.columns
            .iter()
            .zip(x)
            .fold(self.objective_offset, |acc, (c, &xj)| acc + c.cost * xj)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn row_index(&self, name: &str) -> Option<usize> {
        self.rows.iter().position(|r| r.name == name)
    }
}

fn check_name(kind: &'static str, name: &str) -> Result<(), LpError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(LpError::BadName { kind, name: name.to_string() });
    }
    Ok(())
}
