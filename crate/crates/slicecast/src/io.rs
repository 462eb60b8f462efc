//! CSV readers/writers for the stage artifacts that flow between CLI
//! subcommands: feature matrices, target series, and forecasts.

use std::io::{Read, Write};
use std::path::Path;

use crate::features::{FeatureMatrix, TargetSeries};
use crate::{Error, Result};

/// Feature CSV: a header of column names followed by one row per period.
pub fn write_features<W: Write>(m: &FeatureMatrix, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(&m.column_names)?;
    for row in &m.values {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(source: R) -> Result<FeatureMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let column_names: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: Vec<f64> = rec
            .iter()
            .map(|t| {
                t.trim().parse().map_err(|e| Error::MalformedTrace {
                    line,
                    msg: format!("bad feature value `{t}`: {e}"),
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != column_names.len() {
            return Err(Error::MalformedTrace {
                line,
                msg: format!("expected {} columns, got {}", column_names.len(), row.len()),
            });
        }
        values.push(row);
    }
    Ok(FeatureMatrix { column_names, values })
}

/// Target CSV: `period,y`.
pub fn write_target<W: Write>(target: &TargetSeries, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["period", "y"])?;
    for (t, v) in target.values.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_target<R: Read>(source: R) -> Result<Vec<f64>> {
    read_two_column(source, "y")
}

/// Forecast CSV: `period,yhat`, periods are global indexes into the trace.
pub fn write_forecast<W: Write>(start_period: usize, values: &[f64], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["period", "yhat"])?;
    for (j, v) in values.iter().enumerate() {
        w.write_record([(start_period + j).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_forecast<R: Read>(source: R) -> Result<Vec<f64>> {
    read_two_column(source, "yhat")
}

fn read_two_column<R: Read>(source: R, value_name: &str) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if headers.len() != 2 || headers[0] != "period" || headers[1] != value_name {
        return Err(Error::MalformedTrace {
            line: 1,
            msg: format!("expected header `period,{value_name}`, got `{}`", headers.join(",")),
        });
    }
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let v: f64 = rec
            .get(1)
            .ok_or_else(|| Error::MalformedTrace { line, msg: "missing value".into() })?
            .trim()
            .parse()
            .map_err(|e| Error::MalformedTrace { line, msg: format!("bad value: {e}") })?;
        values.push(v);
    }
    Ok(values)
}

pub fn write_features_file(m: &FeatureMatrix, path: &Path) -> Result<()> {
    write_features(m, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_features_file(path: &Path) -> Result<FeatureMatrix> {
    read_features(std::fs::File::open(path)?)
}

pub fn write_target_file(target: &TargetSeries, path: &Path) -> Result<()> {
    write_target(target, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_target_file(path: &Path) -> Result<Vec<f64>> {
    read_target(std::fs::File::open(path)?)
}

pub fn write_forecast_file(start_period: usize, values: &[f64], path: &Path) -> Result<()> {
    write_forecast(start_period, values, std::io::BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_forecast_file(path: &Path) -> Result<Vec<f64>> {
    read_forecast(std::fs::File::open(path)?)
}
