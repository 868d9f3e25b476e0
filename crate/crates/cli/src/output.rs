//! CSV tables and JSONL run records.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use voronoi_rsw::mc::Estimate;

use crate::config::RunConfig;
use crate::error::{usage, Result};

pub const ESTIMATE_HEADER: [&str; 11] = [
    "event",
    "kind-params",
    "p",
    "intensity",
    "n",
    "k",
    "p_hat",
    "ci_lo",
    "ci_hi",
    "seed",
    "aborts",
];

/// A header and its rows, every cell already formatted.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_estimate(&mut self, e: &Estimate) {
        self.push(estimate_row(e));
    }

    fn write_to<W: Write>(&self, w: W, header: bool) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        if header {
            out.write_record(&self.header)?;
        }
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Header and rows on standard output.
    pub fn print(&self) -> Result<()> {
        self.write_to(io::stdout().lock(), true)
    }

    /// Append the rows to `path`, writing the header first when the file is
    /// new or empty. An existing file must carry the same header.
    pub fn append(&self, path: &Path) -> Result<()> {
        let existing = match std::fs::metadata(path) {
            Ok(m) => m.len() > 0,
            Err(_) => false,
        };
        if existing {
            let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
            if let Some(first) = r.records().next() {
                let first = first?;
                if first.iter().ne(self.header.iter().map(String::as_str)) {
                    return Err(usage(format!(
                        "{} has a different header; refusing to append",
                        path.display()
                    )));
                }
            }
        }
        let f = OpenOptions::new().create(true).append(true).open(path)?;
        self.write_to(f, !existing)
    }

    pub fn emit(&self, config: &RunConfig) -> Result<()> {
        self.print()?;
        if let Some(path) = &config.csv {
            self.append(path)?;
        }
        Ok(())
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn estimate_row(e: &Estimate) -> Vec<String> {
    vec![
        e.spec.event.name().to_string(),
        e.spec.event.params(),
        fmt_f64(e.spec.p),
        fmt_f64(e.spec.intensity),
        e.n.to_string(),
        e.k.to_string(),
        fmt_f64(e.p_hat),
        fmt_f64(e.ci.0),
        fmt_f64(e.ci.1),
        e.master_seed.to_string(),
        e.aborted.to_string(),
    ]
}

/// One JSONL record: command, version, time, the resolved configuration,
/// the master seed and the command's results.
pub fn log_record(command: &str, config: &RunConfig, results: &impl Serialize) -> Result<Value> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(json!({
        "command": command,
        "version": voronoi_rsw::VERSION,
        "timestamp": timestamp,
        "seed": config.seed(),
        "config": config,
        "results": serde_json::to_value(results)?,
    }))
}

pub fn write_log(command: &str, config: &RunConfig, results: &impl Serialize) -> Result<()> {
    let Some(path) = &config.log else {
        return Ok(());
    };
    let record = log_record(command, config, results)?;
    let mut f: File = OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{}", serde_json::to_string(&record)?)?;
    Ok(())
}
