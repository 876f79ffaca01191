//! Transient traces and their CSV form.
//!
//! The CSV dialect is fixed: comma separated, `.` decimal point, a mandatory
//! `t,v,i,w,dwdt` header, LF line endings, and floats written in shortest
//! round-trip form so a parse of the file reproduces every sample exactly.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drive::DriveKind;
use crate::error::{Error, Result};
use crate::models::{ModelKind, OnSide};

/// File suffix, header and the pair of values written per sample.
type PlotColumns = (&'static str, &'static str, fn(&Sample) -> (f64, f64));

pub const CSV_HEADER: [&str; 5] = ["t", "v", "i", "w", "dwdt"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub v: f64,
    pub i: f64,
    pub w: f64,
    pub dwdt: f64,
}

/// What a trace needs to be analyzed on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub model: ModelKind,
    pub params_hash: String,
    pub drive: String,
    /// Port quantity the state equation is written in.
    pub controlling: DriveKind,
    pub on_side: OnSide,
    pub state_unit: String,
    pub w_min: f64,
    pub w_max: f64,
    pub solver: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub samples: Vec<Sample>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples of the controlling drive quantity (regressor for linearity).
    pub fn controlling(&self, s: &Sample) -> f64 {
        match self.meta.controlling {
            DriveKind::Current => s.i,
            DriveKind::Voltage => s.v,
        }
    }

    pub fn to_csv(&self) -> String {
        samples_to_csv(&self.samples)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Two-column plot files: I-V, w-t and dw/dt-v.
    pub fn write_plot_data(&self, dir: &Path, stem: &str) -> Result<()> {
        let columns: [PlotColumns; 3] = [
            ("iv", "v,i", |s| (s.v, s.i)),
            ("wt", "t,w", |s| (s.t, s.w)),
            ("dwdt_v", "v,dwdt", |s| (s.v, s.dwdt)),
        ];
        for (suffix, header, pick) in columns {
            let mut out = String::with_capacity(self.samples.len() * 48);
            out.push_str(header);
            out.push('\n');
            for s in &self.samples {
                let (a, b) = pick(s);
                let _ = writeln!(out, "{a:?},{b:?}");
            }
            let path = dir.join(format!("{stem}.{suffix}.csv"));
            std::fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

pub fn samples_to_csv(samples: &[Sample]) -> String {
    let mut out = String::with_capacity(samples.len() * 96);
    out.push_str(&CSV_HEADER.join(","));
    out.push('\n');
    for s in samples {
        // `{:?}` is the shortest representation that parses back to the same f64
        let _ = writeln!(out, "{:?},{:?},{:?},{:?},{:?}", s.t, s.v, s.i, s.w, s.dwdt);
    }
    out
}

/// Parses trace CSV. Columns are located by header name, so extra columns
/// and any column order are accepted.
pub fn read_samples<R: Read>(reader: R) -> Result<Vec<Sample>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedTrace(e.to_string()))?
        .clone();
    let mut idx = [0usize; 5];
    for (slot, name) in idx.iter_mut().zip(CSV_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MalformedTrace(format!("missing column `{name}`")))?;
    }
    let mut samples = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedTrace(e.to_string()))?;
        let mut vals = [0.0f64; 5];
        for (k, (val, &col)) in vals.iter_mut().zip(&idx).enumerate() {
            let field = record.get(col).ok_or_else(|| {
                Error::MalformedTrace(format!("row {}: missing `{}`", row + 2, CSV_HEADER[k]))
            })?;
            *val = field.trim().parse().map_err(|_| {
                Error::MalformedTrace(format!(
                    "row {}: `{}` is not a number in column `{}`",
                    row + 2,
                    field,
                    CSV_HEADER[k]
                ))
            })?;
        }
        let [t, v, i, w, dwdt] = vals;
        samples.push(Sample { t, v, i, w, dwdt });
    }
    Ok(samples)
}

pub fn read_samples_from_path(path: &Path) -> Result<Vec<Sample>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_samples(file)
}
