//! CSV time series: header `t,theta,<channels...>`, one row per sample,
//! values in `{:.16e}` so repeated runs are byte-identical.

use std::path::Path;

use pmsm_imbalance::TimeSeries;

use crate::error::{CliError, Result};

pub fn format_csv(series: &TimeSeries) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t", "theta"];
    header.extend(series.channel_names());
    w.write_record(&header).map_err(csv_err)?;
    let mut row = Vec::with_capacity(header.len());
    for k in 0..series.len() {
        row.clear();
        row.push(format!("{:.16e}", series.t[k]));
        row.push(format!("{:.16e}", series.theta[k]));
        for (_, data) in &series.channels {
            row.push(format!("{:.16e}", data[k]));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn write_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    std::fs::write(path, format_csv(series)?).map_err(|e| CliError::io(path, e))
}

/// Reads a file written by [`write_csv`]; `t` and `theta` are required.
pub fn read_csv(path: &Path) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::io(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 || header[0] != "t" || header[1] != "theta" {
        return Err(CliError::io(path, "header must start with `t,theta`"));
    }
    let mut series = TimeSeries {
        t: Vec::new(),
        theta: Vec::new(),
        channels: header[2..]
            .iter()
            .map(|n| (n.clone(), Vec::new()))
            .collect(),
    };
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| CliError::io(path, e))?;
        let mut values = Vec::with_capacity(record.len());
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::io(path, format!("row {}: `{field}` is not a number", line + 2))
            })?;
            values.push(v);
        }
        series.t.push(values[0]);
        series.theta.push(values[1]);
        for ((_, ch), v) in series.channels.iter_mut().zip(&values[2..]) {
            ch.push(*v);
        }
    }
    Ok(series)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(e.to_string())
}
