//! Tabular experiment output.
//!
//! A report is written as `# key: value` comment lines followed by a CSV
//! table with one header row naming every [`Row`] field.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Relative error, or a marker for an exact value of zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeError {
    Value(f64),
    ExactZero,
}

impl RelativeError {
    pub fn of(estimate: f64, exact: f64) -> Self {
        match super::relative_error(estimate, exact) {
            Ok(v) => RelativeError::Value(v),
            Err(_) => RelativeError::ExactZero,
        }
    }

    /// `true` for an exact zero answered with an exact zero.
    pub fn within(&self, alpha: f64, estimate: f64) -> bool {
        match *self {
            RelativeError::Value(v) => v <= alpha,
            RelativeError::ExactZero => estimate == 0.0,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            RelativeError::Value(v) => Some(v),
            RelativeError::ExactZero => None,
        }
    }
}

impl Serialize for RelativeError {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RelativeError::Value(v) => s.serialize_f64(*v),
            RelativeError::ExactZero => s.serialize_str("exact-zero"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Row {
    pub dataset: String,
    /// What was measured, e.g. `insert:linear` or `bound:pareto`.
    pub variant: String,
    pub n: u64,
    pub q: Option<f64>,
    pub estimate: Option<f64>,
    pub exact: Option<f64>,
    pub relative_error: Option<RelativeError>,
    pub rank_error: Option<f64>,
    pub bucket_count: Option<usize>,
    pub bytes: Option<usize>,
    /// Wall-clock nanoseconds. The only column that varies between reruns.
    pub elapsed_ns: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub header: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl EvalReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.header.push((key.into(), value.to_string()));
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidParameter(format!("write failed: {e}"));
        for (k, v) in &self.header {
            writeln!(out, "# {k}: {v}").map_err(io)?;
        }
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        w.write_record([
            "dataset",
            "variant",
            "n",
            "q",
            "estimate",
            "exact",
            "relative_error",
            "rank_error",
            "bucket_count",
            "bytes",
            "elapsed_ns",
        ])
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
        w.flush().map_err(io)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = EvalReport::new();
        r.note("alpha", 0.01);
        r.push(Row {
            dataset: "pareto".into(),
            variant: "accuracy".into(),
            n: 3,
            q: Some(0.5),
            estimate: Some(1.98),
            exact: Some(2.0),
            relative_error: Some(RelativeError::of(1.98, 2.0)),
            rank_error: Some(0.0),
            bucket_count: Some(3),
            ..Row::default()
        });
        r.push(Row {
            dataset: "file".into(),
            variant: "accuracy".into(),
            n: 1,
            q: Some(0.5),
            estimate: Some(0.0),
            exact: Some(0.0),
            relative_error: Some(RelativeError::of(0.0, 0.0)),
            ..Row::default()
        });
        let text = r.to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# alpha: 0.01");
        assert_eq!(
            lines[1],
            "dataset,variant,n,q,estimate,exact,relative_error,rank_error,bucket_count,bytes,elapsed_ns"
        );
        assert!(lines[2].starts_with("pareto,accuracy,3,0.5,1.98,2.0,0.01"));
        assert!(lines[2].ends_with(",0.0,3,,"));
        assert_eq!(lines[3], "file,accuracy,1,0.5,0.0,0.0,exact-zero,,,,");
    }

    #[test]
    fn exact_zero_within() {
        assert!(RelativeError::ExactZero.within(0.01, 0.0));
        assert!(!RelativeError::ExactZero.within(0.01, 1e-3));
        assert!(RelativeError::Value(0.01).within(0.01, 5.0));
    }
}
