//! CSV and JSON formats exchanged with other tools.
//!
//! CSV files are comma separated with a header row and `.` decimals. Numbers
//! are written in Rust's shortest round-trip form so re-reading a file gives
//! back the same `f64` values.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::engagement::EngagementLoop;
use crate::error::{Error, Result};
use crate::fit::LinearFit;
use crate::forces::{ForceLoopSample, ForceSample, Monotonicity};
use crate::model::{SinusoidFit, Trace};
use crate::surface::SurfaceProfile;

pub const FORCE_HEADER: [&str; 3] = ["x", "fx", "fy"];
pub const SURFACE_HEADER: [&str; 2] = ["x", "y"];
pub const LOOP_HEADER: [&str; 3] = ["x", "tool_y", "contact"];
pub const FORCE_LOOP_HEADER: [&str; 3] = ["x", "tool_y", "force"];
pub const SUMMARY_HEADER: [&str; 3] = ["wavelength", "relief_length", "max_contact"];
pub const SERIES_HEADER: [&str; 2] = ["tip_x", "length"];
pub const SERIES_WITH_CHIP_HEADER: [&str; 3] = ["tip_x", "length", "chip_thickness"];
pub const TRACE_HEADER: [&str; 2] = ["x", "value"];

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Reads the named numeric columns from a CSV stream with a header row.
/// Extra columns are ignored. Line numbers in errors are 1-based and count
/// the header.
pub fn read_columns<R: Read>(reader: R, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let idx = names
        .iter()
        .map(|name| {
            headers.iter().position(|h| h == *name).ok_or_else(|| Error::Parse {
                line: 1,
                message: format!(
                    "missing column `{name}` (header is `{}`)",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cols = vec![Vec::new(); names.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        for (c, &i) in idx.iter().enumerate() {
            let field = rec.get(i).unwrap_or("");
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column `{}`: cannot parse `{field}` as a number", names[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column `{}`: non-finite value", names[c]),
                });
            }
            cols[c].push(v);
        }
    }
    Ok(cols)
}

/// Reads a force file with header `x,fx,fy`.
pub fn read_forces<R: Read>(reader: R) -> Result<Vec<ForceSample>> {
    let cols = read_columns(reader, &FORCE_HEADER)?;
    if cols[0].len() < 2 {
        return Err(Error::Parse {
            line: 0,
            message: "force file needs at least two data rows".into(),
        });
    }
    Ok((0..cols[0].len())
        .map(|i| ForceSample {
            x: cols[0][i],
            fx: cols[1][i],
            fy: cols[2][i],
        })
        .collect())
}

/// Writes rows under `header`.
pub fn write_rows<W: Write, I>(writer: W, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header).map_err(io_err)?;
    for row in rows {
        let row = row.as_ref();
        if row.len() != header.len() {
            return Err(Error::Io(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|v| v.to_string())).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_surface<W: Write>(writer: W, surface: &SurfaceProfile) -> Result<()> {
    write_rows(
        writer,
        &SURFACE_HEADER,
        surface.xs().zip(surface.heights()).map(|(x, &y)| [x, y]),
    )
}

/// Writes a trace as two columns under `header`.
pub fn write_trace<W: Write>(writer: W, trace: &Trace, header: [&str; 2]) -> Result<()> {
    write_rows(writer, &header, trace.points().map(|(x, v)| [x, v]))
}

pub fn write_loop<W: Write>(writer: W, lp: &EngagementLoop) -> Result<()> {
    write_rows(
        writer,
        &LOOP_HEADER,
        lp.samples().iter().map(|s| [s.x, s.tool_y, s.contact]),
    )
}

pub fn write_force_loop<W: Write>(writer: W, lp: &[ForceLoopSample]) -> Result<()> {
    write_rows(writer, &FORCE_LOOP_HEADER, lp.iter().map(|s| [s.x, s.tool_y, s.force]))
}

/// One row of the sweep summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub wavelength: f64,
    pub relief_length: f64,
    pub max_contact: f64,
}

pub fn write_summary<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    write_rows(
        writer,
        &SUMMARY_HEADER,
        rows.iter().map(|r| [r.wavelength, r.relief_length, r.max_contact]),
    )
}

pub fn read_summary<R: Read>(reader: R) -> Result<Vec<SummaryRow>> {
    let cols = read_columns(reader, &SUMMARY_HEADER)?;
    Ok((0..cols[0].len())
        .map(|i| SummaryRow {
            wavelength: cols[0][i],
            relief_length: cols[1][i],
            max_contact: cols[2][i],
        })
        .collect())
}

/// Trend of the maximum contact for one relief length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRecord {
    pub relief_length: f64,
    pub trend: Monotonicity,
}

pub const TREND_HEADER: [&str; 2] = ["relief_length", "trend"];

pub fn write_trends<W: Write>(writer: W, trends: &[TrendRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TREND_HEADER).map_err(io_err)?;
    for t in trends {
        w.write_record([t.relief_length.to_string(), t.trend.to_string()])
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_trends<R: Read>(reader: R) -> Result<Vec<TrendRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().ne(TREND_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", TREND_HEADER.join(",")),
        });
    }
    rdr.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn write_trends_json<W: Write>(mut writer: W, trends: &[TrendRecord]) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, trends).map_err(io_err)?;
    writer.write_all(b"\n").map_err(io_err)
}

pub fn read_trends_json<R: Read>(reader: R) -> Result<Vec<TrendRecord>> {
    serde_json::from_reader(reader).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })
}

/// Writes rows as a JSON array of objects keyed by `header`.
pub fn write_rows_json<W: Write, I>(mut writer: W, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let mut records = Vec::new();
    for row in rows {
        let row = row.as_ref();
        if row.len() != header.len() {
            return Err(Error::Io(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        let obj: serde_json::Map<String, serde_json::Value> = header
            .iter()
            .zip(row)
            .map(|(k, &v)| (k.to_string(), serde_json::Value::from(v)))
            .collect();
        records.push(serde_json::Value::Object(obj));
    }
    serde_json::to_writer_pretty(&mut writer, &records).map_err(io_err)?;
    writer.write_all(b"\n").map_err(io_err)
}

/// Reads the named numeric fields from a JSON array of objects, column-wise.
pub fn read_rows_json<R: Read>(reader: R, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let records: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_reader(reader).map_err(|e| Error::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })?;
    let mut cols = vec![Vec::with_capacity(records.len()); names.len()];
    for (i, rec) in records.iter().enumerate() {
        for (c, name) in names.iter().enumerate() {
            let v = rec.get(*name).and_then(|v| v.as_f64()).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("record {i}: missing numeric field `{name}`"),
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

/// A fitted model as emitted by `fit`: either a fixed-wavelength sinusoid or
/// a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub model: FitModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavelength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    pub rms_error: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Sinusoid,
    Linear,
}

impl From<&SinusoidFit> for FitRecord {
    fn from(f: &SinusoidFit) -> Self {
        Self {
            model: FitModel::Sinusoid,
            wavelength: Some(f.wavelength),
            slope: None,
            intercept: None,
            rms_error: f.rms_residual,
            coefficients: vec![f.a0, f.a1, f.a2],
        }
    }
}

impl From<&LinearFit> for FitRecord {
    fn from(f: &LinearFit) -> Self {
        Self {
            model: FitModel::Linear,
            wavelength: None,
            slope: Some(f.slope),
            intercept: Some(f.intercept),
            rms_error: f.rms_error,
            coefficients: vec![f.intercept, f.slope],
        }
    }
}

impl FitRecord {
    pub fn to_sinusoid(&self) -> Option<SinusoidFit> {
        match (self.model, self.wavelength, self.coefficients.as_slice()) {
            (FitModel::Sinusoid, Some(wavelength), &[a0, a1, a2]) => Some(SinusoidFit {
                wavelength,
                a0,
                a1,
                a2,
                rms_residual: self.rms_error,
            }),
            _ => None,
        }
    }

    pub fn to_linear(&self) -> Option<LinearFit> {
        match (self.model, self.slope, self.intercept) {
            (FitModel::Linear, Some(slope), Some(intercept)) => Some(LinearFit {
                slope,
                intercept,
                rms_error: self.rms_error,
            }),
            _ => None,
        }
    }
}

pub fn write_fit_json<W: Write>(mut writer: W, record: &FitRecord) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, record).map_err(io_err)?;
    writer.write_all(b"\n").map_err(io_err)
}

pub fn read_fit_json<R: Read>(reader: R) -> Result<FitRecord> {
    serde_json::from_reader(reader).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: e.to_string(),
    })
}
