//! CSV matrices and point clouds in, JSON reports out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::types::{CostMatrix, Histogram};

pub const SCHEMA_VERSION: u32 = 1;

/// Parses comma-separated rows of numbers. Rows may have different lengths;
/// blank lines are skipped. Line and column numbers in errors are 1-based.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    Ok(parse_lines(text)?.into_iter().map(|(_, r)| r).collect())
}

fn parse_lines(text: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                line,
                column: 0,
                message: e.to_string(),
            }
        })?;
        let line = record
            .position()
            .map_or(rows.len() + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                column: col + 1,
                message: format!("'{field}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line,
                    column: col + 1,
                    message: format!("non-finite value '{field}'"),
                });
            }
            row.push(value);
        }
        rows.push((line, row));
    }
    Ok(rows)
}

/// Parses a rectangular numeric grid, row-major.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let rows = parse_lines(text)?;
    let Some((_, first)) = rows.first() else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty matrix".into(),
        });
    };
    let width = first.len();
    for (r, (line, row)) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Parse {
                line: *line,
                column: row.len().min(width) + 1,
                message: format!(
                    "ragged row {}: {} fields, expected {width}",
                    r + 1,
                    row.len()
                ),
            });
        }
    }
    Ok(DMatrix::from_fn(rows.len(), width, |i, j| rows[i].1[j]))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix(&read(path)?).map_err(|e| with_path(e, path))
}

pub fn load_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_rows(&read(path)?).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

/// Points stored as matrix rows, with weights on the points.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: DMatrix<f64>,
    weights: Histogram,
}

impl PointCloud {
    /// Uniform weights.
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        let weights = Histogram::uniform(points.nrows())?;
        Self::with_weights(points, weights)
    }

    pub fn with_weights(points: DMatrix<f64>, weights: Histogram) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::InvalidArgument("point cloud is empty".into()));
        }
        if weights.len() != points.nrows() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} weights", points.nrows()),
                found: format!("{} weights", weights.len()),
            });
        }
        crate::types::check_finite(&points)?;
        Ok(PointCloud { points, weights })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(load_matrix(path)?)
    }

    pub fn points(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn weights(&self) -> &Histogram {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }
}

/// `C_ik = ‖x_i - x_k‖²`, exactly symmetric with a zero diagonal.
pub fn pairwise_sqdist(cloud: &PointCloud) -> CostMatrix {
    let x = cloud.points();
    let n = x.nrows();
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for k in (i + 1)..n {
            let d = (x.row(i) - x.row(k)).norm_squared();
            c[(i, k)] = d;
            c[(k, i)] = d;
        }
    }
    CostMatrix::symmetric(c).expect("finite symmetric by construction")
}

/// CSV with 17 significant digits per entry, LF line endings.
pub fn format_matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{:.16e}", m[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Converts a finite number to JSON.
pub fn num(x: f64) -> Result<Value> {
    if !x.is_finite() {
        return Err(Error::NonFinite { row: 0, col: 0 });
    }
    Ok(Value::from(x))
}

/// Matrix as an array of rows.
pub fn matrix_json(m: &DMatrix<f64>) -> Result<Value> {
    crate::types::check_finite(m)?;
    Ok(Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| Value::from(m[(i, j)])).collect()))
            .collect(),
    ))
}

pub fn vector_json(v: &[f64]) -> Result<Value> {
    v.iter()
        .map(|x| num(*x))
        .collect::<Result<Vec<_>>>()
        .map(Value::Array)
}

/// Machine-readable result of one command.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub instance: Map<String, Value>,
    pub results: Map<String, Value>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            instance: Map::new(),
            results: Map::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    /// Pretty JSON. Fails if any value is null, which is how non-finite
    /// floats surface after conversion.
    pub fn to_json(&self) -> Result<String> {
        for (k, v) in self.instance.iter().chain(&self.results) {
            if has_null(v) {
                return Err(Error::InvalidArgument(format!(
                    "report field '{k}' is not finite"
                )));
            }
        }
        if self.timings_ms.values().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite timing".into()));
        }
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

fn has_null(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Array(a) => a.iter().any(has_null),
        Value::Object(o) => o.values().any(has_null),
        _ => false,
    }
}
