//! CSV helpers shared by the data modules.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use thiserror::Error;

pub const HOURS_PER_YEAR: usize = 8760;
pub const DAYS_PER_YEAR: usize = 365;
const LEAP_DAY_START: usize = 59 * 24;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl DataError {
    pub fn format(path: &Path, message: impl Into<String>) -> Self {
        Self::Format { path: path.to_path_buf(), message: message.into() }
    }
}

/// Reads every row of a headed CSV file into `T`.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DataError> {
    let csv_err = |source| DataError::Csv { path: path.to_path_buf(), source };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    rdr.deserialize().collect::<Result<Vec<T>, _>>().map_err(csv_err)
}

/// Hourly values per named column, e.g. zones or technologies.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    /// `values[c][t]` for column `c` and hour `t`.
    pub values: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().position(|c| c == name).map(|i| self.values[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Reads a table with an `hour` column followed by one column per series.
/// A leap-year table of 8784 rows loses its 29 February.
pub fn read_series(path: &Path) -> Result<SeriesTable, DataError> {
    let csv_err = |source| DataError::Csv { path: path.to_path_buf(), source };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err)?;
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.get(0) != Some("hour") {
        return Err(DataError::format(path, "first column must be `hour`"));
    }
    let columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut values = vec![Vec::with_capacity(HOURS_PER_YEAR); columns.len()];
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        for (c, series) in values.iter_mut().enumerate() {
            let raw = rec.get(c + 1).unwrap_or("");
            let v: f64 = raw
                .parse()
                .map_err(|_| DataError::format(path, format!("row {}: bad number `{raw}`", line + 2)))?;
            if !v.is_finite() {
                return Err(DataError::format(path, format!("row {}: non-finite value", line + 2)));
            }
            series.push(v);
        }
    }
    for series in &mut values {
        if series.len() == HOURS_PER_YEAR + 24 {
            series.drain(LEAP_DAY_START..LEAP_DAY_START + 24);
        }
        if series.len() != HOURS_PER_YEAR {
            return Err(DataError::format(path, format!("expected {HOURS_PER_YEAR} hourly rows, found {}", series.len())));
        }
    }
    Ok(SeriesTable { columns, values })
}

/// Writes `hour,<columns...>` with one row per hour.
pub fn write_series(path: &Path, table: &SeriesTable) -> Result<(), DataError> {
    let io_err = |source| DataError::Io { path: path.to_path_buf(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    write!(w, "hour").map_err(io_err)?;
    for c in &table.columns {
        write!(w, ",{c}").map_err(io_err)?;
    }
    writeln!(w).map_err(io_err)?;
    for t in 0..table.len() {
        write!(w, "{t}").map_err(io_err)?;
        for series in &table.values {
            write!(w, ",{}", series[t]).map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Creates a CSV writer on `path`.
pub fn csv_writer(path: &Path) -> Result<csv::Writer<File>, DataError> {
    csv::Writer::from_path(path).map_err(|source| DataError::Csv { path: path.to_path_buf(), source })
}

pub fn csv_error(path: &Path) -> impl Fn(csv::Error) -> DataError + '_ {
    move |source| DataError::Csv { path: path.to_path_buf(), source }
}

pub fn io_error(path: &Path) -> impl Fn(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io { path: path.to_path_buf(), source }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip_and_leap_day() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let table = SeriesTable {
            columns: vec!["a".into(), "b".into()],
            values: vec![(0..HOURS_PER_YEAR).map(|t| t as f64 * 0.5).collect(), vec![1.25; HOURS_PER_YEAR]],
        };
        write_series(&path, &table).unwrap();
        assert_eq!(read_series(&path).unwrap(), table);

        let mut text = String::from("hour,a\n");
        for t in 0..HOURS_PER_YEAR + 24 {
            let v = if (LEAP_DAY_START..LEAP_DAY_START + 24).contains(&t) { 99.0 } else { 1.0 };
            text.push_str(&format!("{t},{v}\n"));
        }
        std::fs::write(&path, text).unwrap();
        let leap = read_series(&path).unwrap();
        assert_eq!(leap.len(), HOURS_PER_YEAR);
        assert!(leap.values[0].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn short_series_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "hour,a\n0,1\n").unwrap();
        assert!(matches!(read_series(&path), Err(DataError::Format { .. })));
    }
}
