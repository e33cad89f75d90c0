//! JSON and CSV input formats and fixed-precision number output.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{FunctionSpec, GeneratingFunction, PsiTable, Support, TailFunction};

/// JSON form of a generating function. `a` defaults to the positive half
/// line's lower end and a missing `b` means `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    Power {
        c1: f64,
        m: f64,
        #[serde(default)]
        a: Option<f64>,
        #[serde(default)]
        b: Option<f64>,
    },
    NaturalStretchedExp {
        c: f64,
        theta: f64,
        #[serde(default)]
        a: Option<f64>,
        #[serde(default)]
        b: Option<f64>,
    },
    Tabulated { points: Vec<(f64, f64)> },
}

fn support_of(a: Option<f64>, b: Option<f64>) -> Result<Support> {
    match (a, b) {
        (None, None) => Ok(Support::positive_half_line()),
        (a, b) => Support::new(a.unwrap_or(f64::MIN_POSITIVE), b.unwrap_or(f64::INFINITY)),
    }
}

impl PsiSpec {
    pub fn build(&self) -> Result<GeneratingFunction> {
        match self {
            PsiSpec::Power { c1, m, a, b } => GeneratingFunction::power(*c1, *m, support_of(*a, *b)?),
            PsiSpec::NaturalStretchedExp { c, theta, a, b } => {
                GeneratingFunction::natural_stretched_exp(*c, *theta, support_of(*a, *b)?)
            }
            PsiSpec::Tabulated { points } => Ok(GeneratingFunction::tabulated(PsiTable::new(points.clone())?)),
        }
    }
}

pub fn parse_spec(text: &str) -> Result<FunctionSpec> {
    let spec: FunctionSpec = serde_json::from_str(text)?;
    spec.validate()?;
    Ok(spec)
}

pub fn parse_tail(text: &str) -> Result<TailFunction> {
    let tail: TailFunction = serde_json::from_str(text)?;
    tail.validate()?;
    Ok(tail)
}

pub fn parse_psi(text: &str) -> Result<GeneratingFunction> {
    serde_json::from_str::<PsiSpec>(text)?.build()
}

/// Rows of a two-column numeric CSV with a header line.
pub fn read_two_columns(reader: impl Read) -> Result<Vec<(f64, f64)>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse(format!("row {}: expected 2 columns, found {}", i + 1, record.len())));
        }
        let cell = |j: usize| -> Result<f64> {
            record[j]
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: '{}' is not a number", i + 1, &record[j])))
        };
        rows.push((cell(0)?, cell(1)?));
    }
    Ok(rows)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_spec(path: &Path) -> Result<FunctionSpec> {
    parse_spec(&read_text(path)?)
}

/// A `.csv` file is a `(t, T)` table; anything else is tail JSON.
pub fn read_tail(path: &Path) -> Result<TailFunction> {
    if is_csv(path) {
        TailFunction::tabulated(read_two_columns(open(path)?)?).map_err(as_parse)
    } else {
        parse_tail(&read_text(path)?)
    }
}

/// A `.csv` file is a `(p, psi)` table; anything else is ψ JSON.
pub fn read_psi(path: &Path) -> Result<GeneratingFunction> {
    if is_csv(path) {
        Ok(GeneratingFunction::tabulated(PsiTable::new(read_two_columns(open(path)?)?)?))
    } else {
        parse_psi(&read_text(path)?)
    }
}

fn as_parse(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Parse(msg),
        other => other,
    }
}

/// 17 significant digits in scientific notation; `inf`, `-inf`, `nan`
/// for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Number(f64),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::Number(x) => format_number(x),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

pub fn write_csv(writer: impl Write, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(header)?;
    for row in rows {
        csv.write_record(row.iter().map(Cell::render))?;
    }
    csv.flush()?;
    Ok(())
}
