//! Plain-text coefficient tables: one named approximant per line.
//!
//! Line shape:
//! `NAME kind=poly|rational interval=a,b eps=E coeffs=a0,a1,... [den=b0,b1,...]`
//!
//! Numbers are written in scientific notation with enough digits to
//! round-trip `f64` exactly. Blank lines and `#` comment lines are skipped
//! on read and never written.

use std::fmt::Write as _;
use std::path::Path;

use super::{Approx as _, MinimaxError, PolyApprox, RationalApprox};

/// One approximant in a coefficient table.
#[derive(Debug, Clone, PartialEq)]
pub enum TableEntry {
    Poly(PolyApprox),
    Rational(RationalApprox),
}

/// A named table record.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRecord {
    pub name: String,
    pub entry: TableEntry,
}

impl TableRecord {
    pub fn poly(name: &str, approx: PolyApprox) -> Self {
        Self {
            name: name.to_string(),
            entry: TableEntry::Poly(approx),
        }
    }

    pub fn rational(name: &str, approx: RationalApprox) -> Self {
        Self {
            name: name.to_string(),
            entry: TableEntry::Rational(approx),
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(",")
}

/// Renders records to the table text format.
pub fn write_table_string(records: &[TableRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        match &rec.entry {
            TableEntry::Poly(p) => {
                let (a, b) = p.interval();
                writeln!(
                    out,
                    "{} kind=poly interval={},{} eps={} coeffs={}",
                    rec.name,
                    fmt_num(a),
                    fmt_num(b),
                    fmt_num(p.eps()),
                    fmt_list(p.coeffs()),
                )
                .expect("string write cannot fail");
            }
            TableEntry::Rational(r) => {
                let (a, b) = r.interval();
                writeln!(
                    out,
                    "{} kind=rational interval={},{} eps={} coeffs={} den={}",
                    rec.name,
                    fmt_num(a),
                    fmt_num(b),
                    fmt_num(r.eps()),
                    fmt_list(r.num()),
                    fmt_list(r.den()),
                )
                .expect("string write cannot fail");
            }
        }
    }
    out
}

/// Writes records to a file in the table text format.
pub fn write_table(records: &[TableRecord], path: &Path) -> Result<(), MinimaxError> {
    std::fs::write(path, write_table_string(records))?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> MinimaxError {
    MinimaxError::TableParse {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64, MinimaxError> {
    s.parse::<f64>()
        .map_err(|_| parse_err(line, format!("invalid {what}: {s:?}")))
}

fn parse_list(s: &str, line: usize, what: &str) -> Result<Vec<f64>, MinimaxError> {
    if s.is_empty() {
        return Err(parse_err(line, format!("empty {what} list")));
    }
    s.split(',')
        .map(|tok| parse_f64(tok, line, what))
        .collect()
}

/// Parses table text into records. Names must be unique within a table.
pub fn read_table_str(text: &str) -> Result<Vec<TableRecord>, MinimaxError> {
    let mut records: Vec<TableRecord> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let name = tokens.next().expect("non-empty line has a token");
        if name.contains('=') {
            return Err(parse_err(lineno, format!("missing record name before {name:?}")));
        }
        if records.iter().any(|r| r.name == name) {
            return Err(parse_err(lineno, format!("duplicate record name {name:?}")));
        }

        let (mut kind, mut interval, mut eps, mut coeffs, mut den) =
            (None, None, None, None, None);
        for tok in tokens {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| parse_err(lineno, format!("expected key=value, got {tok:?}")))?;
            match key {
                "kind" => kind = Some(value.to_string()),
                "interval" => {
                    let (a, b) = value.split_once(',').ok_or_else(|| {
                        parse_err(lineno, format!("interval needs two bounds, got {value:?}"))
                    })?;
                    interval = Some((
                        parse_f64(a, lineno, "interval bound")?,
                        parse_f64(b, lineno, "interval bound")?,
                    ));
                }
                "eps" => eps = Some(parse_f64(value, lineno, "eps")?),
                "coeffs" => coeffs = Some(parse_list(value, lineno, "coeffs")?),
                "den" => den = Some(parse_list(value, lineno, "den")?),
                other => {
                    return Err(parse_err(lineno, format!("unknown key {other:?}")));
                }
            }
        }

        let kind = kind.ok_or_else(|| parse_err(lineno, "missing kind"))?;
        let interval = interval.ok_or_else(|| parse_err(lineno, "missing interval"))?;
        let eps = eps.ok_or_else(|| parse_err(lineno, "missing eps"))?;
        let coeffs = coeffs.ok_or_else(|| parse_err(lineno, "missing coeffs"))?;
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(parse_err(lineno, format!("eps must be >= 0, got {eps}")));
        }

        let entry = match kind.as_str() {
            "poly" => {
                if den.is_some() {
                    return Err(parse_err(lineno, "kind=poly must not carry den"));
                }
                TableEntry::Poly(
                    PolyApprox::new(coeffs, interval, eps)
                        .map_err(|e| parse_err(lineno, e.to_string()))?,
                )
            }
            "rational" => {
                let den = den.ok_or_else(|| parse_err(lineno, "kind=rational needs den"))?;
                TableEntry::Rational(
                    RationalApprox::new(coeffs, den, interval, eps)
                        .map_err(|e| parse_err(lineno, e.to_string()))?,
                )
            }
            other => {
                return Err(parse_err(
                    lineno,
                    format!("kind must be poly or rational, got {other:?}"),
                ));
            }
        };

        records.push(TableRecord {
            name: name.to_string(),
            entry,
        });
    }
    Ok(records)
}

/// Reads a coefficient table file.
pub fn read_table(path: &Path) -> Result<Vec<TableRecord>, MinimaxError> {
    read_table_str(&std::fs::read_to_string(path)?)
}
