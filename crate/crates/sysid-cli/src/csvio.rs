//! Plain-CSV readers and writers for every table the binary emits. Floats
//! are written with Rust's shortest round-trip formatting, so
//! write-then-read reproduces values bit-exactly; every writer here has a
//! matching reader and a round-trip test.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sysid_core::optimize::TraceRow;
use sysid_core::series::ChannelSeries;

use crate::CliError;

fn read_to_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(text.lines().map(|l| l.to_string()).collect())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn parse_f64(field: &str, path: &Path, line: usize) -> Result<f64, CliError> {
    field.trim().parse::<f64>().map_err(|_| {
        CliError::Data(format!("{} line {}: not a number: {:?}", path.display(), line, field))
    })
}

/// `t,<label1>,<label2>` with one row per sample.
pub fn write_series(path: &Path, ts: &ChannelSeries) -> Result<(), CliError> {
    let [l1, l2] = ts.labels();
    let mut out = format!("t,{l1},{l2}\n");
    let (c1, c2) = (ts.channel(0), ts.channel(1));
    for i in 0..ts.len() {
        let t = i as f64 * ts.dt();
        let _ = writeln!(out, "{t},{},{}", c1[i], c2[i]);
    }
    write_text(path, &out)
}

pub fn read_series(path: &Path) -> Result<ChannelSeries, CliError> {
    let lines = read_to_lines(path)?;
    let header = lines
        .first()
        .ok_or_else(|| CliError::Data(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() != 3 || cols[0] != "t" {
        return Err(CliError::Data(format!(
            "{}: expected header t,<ch1>,<ch2>, got {:?}",
            path.display(),
            header
        )));
    }
    let labels = [cols[1].to_string(), cols[2].to_string()];
    let mut times = Vec::new();
    let mut ch1 = Vec::new();
    let mut ch2 = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(CliError::Data(format!(
                "{} line {}: expected 3 fields, got {}",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        times.push(parse_f64(fields[0], path, i + 1)?);
        ch1.push(parse_f64(fields[1], path, i + 1)?);
        ch2.push(parse_f64(fields[2], path, i + 1)?);
    }
    if times.len() < 3 {
        return Err(CliError::Data(format!("{}: need at least 3 rows", path.display())));
    }
    let dt = times[1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-12) {
            return Err(CliError::Data(format!(
                "{} line {}: non-uniform time step",
                path.display(),
                i + 3
            )));
        }
    }
    ChannelSeries::new(dt, ch1, ch2, [labels[0].as_str(), labels[1].as_str()])
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Optimizer trace: `iter,best_f,mean_f_elite,sigma_max`.
pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<(), CliError> {
    let mut out = String::from("iter,best_f,mean_f_elite,sigma_max\n");
    for row in trace {
        let _ = writeln!(out, "{},{},{},{}", row.iter, row.best_f, row.mean_f_elite, row.sigma_max);
    }
    write_text(path, &out)
}

/// Generic numeric table with a header row.
pub fn write_table(path: &Path, headers: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), headers.len());
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let lines = read_to_lines(path)?;
    let header = lines
        .first()
        .ok_or_else(|| CliError::Data(format!("{}: empty file", path.display())))?;
    let headers: Vec<String> = header.split(',').map(|s| s.to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != headers.len() {
            return Err(CliError::Data(format!(
                "{} line {}: expected {} fields, got {}",
                path.display(),
                i + 1,
                headers.len(),
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(fields.len());
        for f in fields {
            row.push(parse_f64(f, path, i + 1)?);
        }
        rows.push(row);
    }
    Ok((headers, rows))
}

/// One sweep scenario result flattened to one row per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRow {
    pub snr: f64,
    pub method: String,
    pub scenario: u64,
    pub param: String,
    pub true_value: f64,
    pub prior_mean: f64,
    pub estimate: f64,
    pub termination: String,
}

pub fn write_scenario_rows(path: &Path, rows: &[ScenarioRow]) -> Result<(), CliError> {
    let mut out =
        String::from("snr,method,scenario,param,true_value,prior_mean,estimate,termination\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.snr, r.method, r.scenario, r.param, r.true_value, r.prior_mean, r.estimate,
            r.termination
        );
    }
    write_text(path, &out)
}

pub fn read_scenario_rows(path: &Path) -> Result<Vec<ScenarioRow>, CliError> {
    let lines = read_to_lines(path)?;
    let expect = "snr,method,scenario,param,true_value,prior_mean,estimate,termination";
    if lines.first().map(|s| s.as_str()) != Some(expect) {
        return Err(CliError::Data(format!("{}: unexpected header", path.display())));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(CliError::Data(format!(
                "{} line {}: expected 8 fields",
                path.display(),
                i + 1
            )));
        }
        rows.push(ScenarioRow {
            snr: parse_f64(f[0], path, i + 1)?,
            method: f[1].to_string(),
            scenario: f[2].trim().parse::<u64>().map_err(|_| {
                CliError::Data(format!("{} line {}: bad scenario id", path.display(), i + 1))
            })?,
            param: f[3].to_string(),
            true_value: parse_f64(f[4], path, i + 1)?,
            prior_mean: parse_f64(f[5], path, i + 1)?,
            estimate: parse_f64(f[6], path, i + 1)?,
            termination: f[7].to_string(),
        });
    }
    Ok(rows)
}

/// Aggregate sweep table: `snr,method,param,mean,std`.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub snr: f64,
    pub method: String,
    pub param: String,
    pub mean: f64,
    pub std: f64,
}

pub fn write_aggregate_rows(path: &Path, rows: &[AggregateRow]) -> Result<(), CliError> {
    let mut out = String::from("snr,method,param,mean,std\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.snr, r.method, r.param, r.mean, r.std);
    }
    write_text(path, &out)
}

pub fn read_aggregate_rows(path: &Path) -> Result<Vec<AggregateRow>, CliError> {
    let lines = read_to_lines(path)?;
    if lines.first().map(|s| s.as_str()) != Some("snr,method,param,mean,std") {
        return Err(CliError::Data(format!("{}: unexpected header", path.display())));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.iter().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(CliError::Data(format!(
                "{} line {}: expected 5 fields",
                path.display(),
                i + 1
            )));
        }
        rows.push(AggregateRow {
            snr: parse_f64(f[0], path, i + 1)?,
            method: f[1].to_string(),
            param: f[2].to_string(),
            mean: parse_f64(f[3], path, i + 1)?,
            std: parse_f64(f[4], path, i + 1)?,
        });
    }
    Ok(rows)
}
