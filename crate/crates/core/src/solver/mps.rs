//! Fixed-layout MPS export and import.
//!
//! Layout of every data line, with `w = max(8, longest row or column name)`:
//!
//! ```text
//! col 1        space
//! cols 2-3     indicator (bound type or row sense), left aligned
//! col 4        space
//! cols 5..     first name, left aligned, padded to w
//! 2 spaces
//! next w cols  second name, left aligned, padded to w
//! 2 spaces
//! rest         number, `%.12g` rendering, no trailing blanks
//! ```
//!
//! Lines of the ROWS section stop after the first name. Rows are written in
//! construction order and columns in index order with their entries sorted by
//! row, one entry per line. The objective row is named `OBJ` unless a
//! constraint already uses that name, in which case underscores are appended.
//! A constant objective term is written as `-offset` in the RHS of the
//! objective row. Bounds use `FX`, `FR`, `MI`, `LO` and `UP`; a negative upper
//! bound with a zero lower bound is preceded by an explicit `LO 0` so that
//! readers applying the legacy negative-`UP` rule see the same box. Every
//! line ends with `\n`.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::scalar::Scalar;
use crate::solver::lp::{LinearProgram, RowSense, Sense};

const RHS_SET: &str = "RHS";
const BOUND_SET: &str = "BND";
/// Magnitudes at or above this are read as infinite bounds.
const INFINITE_BOUND: f64 = 1e30;

#[derive(Debug, Error)]
pub enum MpsError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("the model is invalid: {0}")]
    Invalid(#[from] crate::solver::lp::LpError),
}

/// Renders `v` like C's `%.12g`.
pub fn format_g12(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (11 - exp) as usize;
        trim_fraction(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn objective_name<T: Scalar>(lp: &LinearProgram<T>) -> String {
    let mut name = String::from("OBJ");
    while lp.rows.iter().any(|r| r.name == name) {
        name.push('_');
    }
    name
}

/// Renders `lp` as fixed-layout MPS text.
pub fn to_mps_string<T: Scalar>(lp: &LinearProgram<T>) -> String {
    let obj = objective_name(lp);
    let w = lp
        .rows
        .iter()
        .map(|r| r.name.len())
        .chain(lp.columns.iter().map(|c| c.name.len()))
        .chain([obj.len(), RHS_SET.len(), BOUND_SET.len()])
        .fold(8, usize::max);
    let num = |v: T| format_g12(v.to_f64_lossless());

    let mut out = format!("NAME          {}\n", lp.name);
    if lp.sense == Sense::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n");
    writeln!(out, " N  {obj}").expect("writing to a String");
    for r in &lp.rows {
        let ind = match r.sense {
            RowSense::Le => "L",
            RowSense::Ge => "G",
            RowSense::Eq => "E",
        };
        writeln!(out, " {ind}  {}", r.name).expect("writing to a String");
    }

    let cols = lp.column_entries();
    let mut body = String::new();
    {
        let entry = |body: &mut String, a: &str, b: &str, v: String| {
            writeln!(body, "    {a:<w$}  {b:<w$}  {v}").expect("writing to a String");
        };
        body.push_str("COLUMNS\n");
        for (j, c) in lp.columns.iter().enumerate() {
            if c.cost != T::zero() || cols[j].is_empty() {
                entry(&mut body, &c.name, &obj, num(c.cost));
            }
            for &(r, v) in &cols[j] {
                entry(&mut body, &c.name, &lp.rows[r].name, num(v));
            }
        }
        body.push_str("RHS\n");
        if lp.objective_offset != T::zero() {
            entry(&mut body, RHS_SET, &obj, num(-lp.objective_offset));
        }
        for r in &lp.rows {
            if r.rhs != T::zero() {
                entry(&mut body, RHS_SET, &r.name, num(r.rhs));
            }
        }
    }
    body.push_str("BOUNDS\n");
    for c in &lp.columns {
        let mut bound = |ind: &str, v: Option<T>| {
            match v {
                Some(v) => writeln!(body, " {ind:<2} {BOUND_SET:<w$}  {:<w$}  {}", c.name, num(v)),
                None => writeln!(body, " {ind:<2} {BOUND_SET:<w$}  {}", c.name),
            }
            .expect("writing to a String");
        };
        let (l, u) = (c.lower, c.upper);
        if l == u {
            bound("FX", Some(l));
        } else if !l.is_finite() && !u.is_finite() {
            bound("FR", None);
        } else {
            if !l.is_finite() {
                bound("MI", None);
            } else if l != T::zero() || u < T::zero() {
                bound("LO", Some(l));
            }
            if u.is_finite() {
                bound("UP", Some(u));
            }
        }
    }
    body.push_str("ENDATA\n");
    out + &body
}

/// Writes `lp` to `path` in fixed-layout MPS.
pub fn export_model<T: Scalar>(lp: &LinearProgram<T>, path: &Path) -> io::Result<()> {
    std::fs::write(path, to_mps_string(lp))
}

pub fn import_model<T: Scalar>(path: &Path) -> Result<LinearProgram<T>, MpsError> {
    let text = std::fs::read_to_string(path)?;
    parse_mps(&text)
}

#[derive(PartialEq)]
enum Section {
    Start,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

/// Parses free-form MPS with whitespace-free names. RANGES is not supported.
pub fn parse_mps<T: Scalar>(text: &str) -> Result<LinearProgram<T>, MpsError> {
    use std::collections::HashMap;

    let mut lp = LinearProgram::<T>::new("", Sense::Minimize);
    let mut section = Section::Start;
    let mut objective: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let err = |line: usize, message: String| MpsError::Parse { line, message };

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let number = |s: &str| -> Result<T, MpsError> {
            s.parse::<f64>().map(T::lit).map_err(|_| err(ln, format!("bad number `{s}`")))
        };
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0] {
                "NAME" => {
                    lp.name = fields.get(1).copied().unwrap_or("").to_string();
                    Section::Start
                }
                "OBJSENSE" => match fields.get(1) {
                    Some(s) => {
                        lp.sense = parse_sense(s).ok_or_else(|| err(ln, format!("bad sense `{s}`")))?;
                        Section::Start
                    }
                    None => Section::ObjSense,
                },
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(err(ln, format!("unsupported section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::ObjSense => {
                lp.sense = parse_sense(fields[0]).ok_or_else(|| err(ln, format!("bad sense `{}`", fields[0])))?;
            }
            Section::Rows => {
                let [ind, name] = fields[..] else {
                    return Err(err(ln, "expected `<sense> <name>`".into()));
                };
                let sense = match ind {
                    "N" => {
                        if objective.is_none() {
                            objective = Some(name.to_string());
                        }
                        continue;
                    }
                    "L" => RowSense::Le,
                    "G" => RowSense::Ge,
                    "E" => RowSense::Eq,
                    other => return Err(err(ln, format!("bad row type `{other}`"))),
                };
                row_index.insert(name.to_string(), lp.num_rows());
                lp.add_row(name, sense, T::zero());
            }
            Section::Columns => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err(ln, "expected `<column> <row> <value> [<row> <value>]`".into()));
                }
                let col = *col_index.entry(fields[0].to_string()).or_insert_with(|| {
                    lp.add_column(fields[0], T::zero(), T::zero(), T::infinity())
                });
                for pair in fields[1..].chunks(2) {
                    let v = number(pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        lp.columns[col].cost = v;
                    } else {
                        let &r = row_index.get(pair[0]).ok_or_else(|| err(ln, format!("unknown row `{}`", pair[0])))?;
                        if v != T::zero() {
                            lp.set(r, col, v);
                        }
                    }
                }
            }
            Section::Rhs => {
                let pairs = match fields.len() {
                    3 | 5 => &fields[1..],
                    2 | 4 => &fields[..],
                    _ => return Err(err(ln, "expected `[<set>] <row> <value>`".into())),
                };
                for pair in pairs.chunks(2) {
                    let v = number(pair[1])?;
                    if Some(pair[0]) == objective.as_deref() {
                        lp.objective_offset = -v;
                    } else {
                        let &r = row_index.get(pair[0]).ok_or_else(|| err(ln, format!("unknown row `{}`", pair[0])))?;
                        lp.rows[r].rhs = v;
                    }
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err(ln, "expected `<type> <set> <column> [<value>]`".into()));
                }
                let &c = col_index
                    .get(fields[2])
                    .ok_or_else(|| err(ln, format!("unknown column `{}`", fields[2])))?;
                let value = || -> Result<T, MpsError> {
                    let v = number(fields.get(3).ok_or_else(|| err(ln, "missing bound value".into()))?)?;
                    Ok(if v.to_f64_lossless() >= INFINITE_BOUND {
                        T::infinity()
                    } else if v.to_f64_lossless() <= -INFINITE_BOUND {
                        T::neg_infinity()
                    } else {
                        v
                    })
                };
                let col = &mut lp.columns[c];
                match fields[0] {
                    "UP" => col.upper = value()?,
                    "LO" => col.lower = value()?,
                    "FX" => {
                        let v = value()?;
                        col.lower = v;
                        col.upper = v;
                    }
                    "FR" => {
                        col.lower = T::neg_infinity();
                        col.upper = T::infinity();
                    }
                    "MI" => col.lower = T::neg_infinity(),
                    "PL" => col.upper = T::infinity(),
                    other => return Err(err(ln, format!("unsupported bound type `{other}`"))),
                }
            }
            Section::Start | Section::End => return Err(err(ln, "data outside a section".into())),
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing ENDATA".into()));
    }
    lp.validate()?;
    Ok(lp)
}

fn parse_sense(s: &str) -> Option<Sense> {
    match s {
        "MAX" | "MAXIMIZE" => Some(Sense::Maximize),
        "MIN" | "MINIMIZE" => Some(Sense::Minimize),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_matches_c_printf() {
        let cases = [
            (1.0, "1"),
            (-2.5, "-2.5"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (1e100, "1e+100"),
            (-0.0, "0"),
            (999999999999.5, "1e+12"),
            (60.15, "60.15"),
        ];
        for (v, s) in cases {
            assert_eq!(format_g12(v), s, "{v}");
        }
    }

    fn toy() -> LinearProgram<f64> {
        let mut lp = LinearProgram::new("toy", Sense::Maximize);
        let x = lp.add_column("x", 3.0, 0.0, 3.0);
        let y = lp.add_column("y_long_name", 2.0, -1.0, f64::INFINITY);
        let z = lp.add_column("z", 0.0, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_column("w", 0.0, -5.0, -2.0);
        lp.objective_offset = 1.5;
        lp.add_constraint("cap", &[(x, 1.0), (y, 1.0)], RowSense::Le, 4.0);
        lp.add_constraint("mix", &[(x, 1.0), (y, 3.0), (z, -0.5)], RowSense::Ge, -6.0);
        lp.add_constraint("bal", &[(z, 1.0)], RowSense::Eq, 0.0);
        lp
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let lp = toy();
        let text = to_mps_string(&lp);
        let mut back: LinearProgram<f64> = parse_mps(&text).unwrap();
        assert_eq!(to_mps_string(&back), text);
        let mut want = lp.clone();
        want.entries.sort_by_key(|e| (e.0, e.1));
        back.entries.sort_by_key(|e| (e.0, e.1));
        assert_eq!(back, want);
        assert_eq!(to_mps_string(&back), text);
    }

    #[test]
    fn layout_is_fixed() {
        let text = to_mps_string(&toy());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "NAME          toy");
        assert_eq!(lines[1], "OBJSENSE");
        assert_eq!(lines[2], "    MAX");
        assert!(lines.contains(&" N  OBJ"));
        assert!(lines.contains(&"    x            OBJ          3"));
        assert!(lines.contains(&"    RHS          OBJ          -1.5"));
        assert!(lines.contains(&" LO BND          w            -5"));
        assert!(lines.contains(&" UP BND          w            -2"));
        assert!(lines.contains(&" LO BND          y_long_name  -1"));
        assert!(lines.contains(&" FR BND          z"));
        assert!(lines.contains(&" UP BND          x            3"));
        assert!(text.lines().all(|l| !l.ends_with(' ')));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "NAME x\nROWS\n N  OBJ\nCOLUMNS\n    a  nope  1\nENDATA\n";
        match parse_mps::<f64>(bad) {
            Err(MpsError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_mps::<f64>("NAME x\nROWS\n").is_err());
    }
}
