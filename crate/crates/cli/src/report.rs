use std::io::Write;

use serde::Serialize;
use serde_json::Value;
use subdyn::error::invalid;
use subdyn::Result;

use crate::config::ExperimentConfig;
use crate::Emit;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A table projection of the payload for CSV and gnuplot output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub checks: Vec<Check>,
    pub payload: Value,
    pub wall_time: f64,
    pub version: String,
}

impl RunReport {
    pub fn new(
        config: &ExperimentConfig,
        checks: Vec<Check>,
        payload: Value,
        wall_time: f64,
    ) -> RunReport {
        RunReport {
            config: config.clone(),
            config_hash: config.hash(),
            checks,
            payload,
            wall_time,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn io(e: std::io::Error) -> subdyn::Error {
    subdyn::Error::InvalidInput(format!("output failed: {e}"))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit<W: Write>(
    report: &RunReport,
    table: &Table,
    config: &ExperimentConfig,
    out: &mut W,
) -> Result<()> {
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
    match config.emit {
        Emit::Json => {
            let s = serde_json::to_string_pretty(report)
                .or_else(|e| invalid(format!("serialization failed: {e}")))?;
            writeln!(out, "{s}").map_err(io)
        }
        Emit::Csv => {
            writeln!(
                out,
                "{}",
                table
                    .columns
                    .iter()
                    .map(|c| csv_field(c))
                    .collect::<Vec<_>>()
                    .join(",")
            )
            .map_err(io)?;
            for r in &table.rows {
                writeln!(
                    out,
                    "{}",
                    r.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",")
                )
                .map_err(io)?;
            }
            Ok(())
        }
        Emit::Gnuplot => {
            let stem = format!("subdyn-{}", report.config_hash);
            let data = config.out_dir.join(format!("{stem}.dat"));
            let script = config.out_dir.join(format!("{stem}.gp"));
            let mut d = format!("# {}\n", table.columns.join(" "));
            for r in &table.rows {
                d.push_str(&r.join(" "));
                d.push('\n');
            }
            std::fs::write(&data, d).map_err(io)?;
            let ycol = if table.columns.len() > 1 { 2 } else { 1 };
            let xlabel = table.columns.first().cloned().unwrap_or_default();
            let ylabel = table.columns.get(ycol - 1).cloned().unwrap_or_default();
            let gp = format!(
                "set xlabel '{xlabel}'\nset ylabel '{ylabel}'\nplot '{}' using 1:{ycol} with linespoints title '{}'\n",
                data.file_name().unwrap().to_string_lossy(),
                report.config.family
            );
            std::fs::write(&script, gp).map_err(io)?;
            writeln!(out, "{}\n{}", script.display(), data.display()).map_err(io)
        }
    }
}
