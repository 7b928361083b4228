//! Benchmark records, memory sampling and comparison tables.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub min_support: f64,
    pub runtime_seconds: f64,
    /// Peak resident-set growth during the call; absent where /proc is unavailable.
    pub peak_memory_mb: Option<f64>,
    pub itemsets: Option<usize>,
    pub rules: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub os: String,
    pub arch: String,
    pub cpus: usize,
    pub version: String,
    pub parallel_cells: bool,
}

impl Environment {
    pub fn current(parallel_cells: bool) -> Self {
        Environment {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            cpus: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            version: env!("CARGO_PKG_VERSION").into(),
            parallel_cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerReport {
    pub algorithm: String,
    pub records: Vec<Record>,
    pub environment: Environment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<serde_json::Value>,
}

impl MinerReport {
    /// Thresholds strictly increasing and every count present where no error was recorded.
    pub fn validate(&self) -> Result<(), String> {
        if !self.records.windows(2).all(|w| w[0].min_support < w[1].min_support) {
            return Err(format!("{}: thresholds are not strictly increasing", self.algorithm));
        }
        for r in &self.records {
            if r.error.is_none() && (r.itemsets.is_none() || r.rules.is_none()) {
                return Err(format!("{}: record at {} lacks counts", self.algorithm, r.min_support));
            }
        }
        Ok(())
    }
}

fn status_kb(field: &str) -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with(field))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

/// Runs `f`, returning its value, wall-clock seconds and peak RSS growth in MB.
///
/// The kernel's high-water mark is reset first, so the peak is this call's own
/// when cells run one at a time.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, f64, Option<f64>) {
    let before = status_kb("VmRSS:");
    let reset = std::fs::write("/proc/self/clear_refs", "5").is_ok();
    let start = Instant::now();
    let value = f();
    let secs = start.elapsed().as_secs_f64();
    let peak = match (before, reset, status_kb("VmHWM:")) {
        (Some(b), true, Some(p)) => Some(p.saturating_sub(b) as f64 / 1024.0),
        _ => None,
    };
    (value, secs, peak)
}

/// One metric laid out with thresholds as rows and algorithms as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub algorithms: Vec<String>,
    pub rows: Vec<(f64, Vec<Option<f64>>)>,
}

impl Comparison {
    pub fn from_reports(reports: &[MinerReport], metric: impl Fn(&Record) -> Option<f64>) -> Self {
        let mut table: BTreeMap<u64, Vec<Option<f64>>> = BTreeMap::new();
        let k = reports.len();
        for (j, rep) in reports.iter().enumerate() {
            for r in &rep.records {
                table.entry(r.min_support.to_bits()).or_insert_with(|| vec![None; k])[j] = metric(r);
            }
        }
        let mut rows: Vec<(f64, Vec<Option<f64>>)> = table.into_iter().map(|(t, v)| (f64::from_bits(t), v)).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        Comparison { algorithms: reports.iter().map(|r| r.algorithm.clone()).collect(), rows }
    }

    /// Failed cells are left empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["min_support".to_string()];
        header.extend(self.algorithms.iter().cloned());
        w.write_record(&header)?;
        for (t, cells) in &self.rows {
            let mut rec = vec![t.to_string()];
            rec.extend(cells.iter().map(|c| c.map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, CliError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers()?.clone();
        let algorithms = header.iter().skip(1).map(String::from).collect();
        let parse = |s: &str| s.parse::<f64>().map_err(|e| CliError::Usage(format!("bad number {s:?}: {e}")));
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let t = parse(&rec[0])?;
            let cells = rec.iter().skip(1).map(|c| if c.is_empty() { Ok(None) } else { parse(c).map(Some) }).collect::<Result<_, _>>()?;
            rows.push((t, cells));
        }
        Ok(Comparison { algorithms, rows })
    }
}
