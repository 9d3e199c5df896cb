//! CSV tables with `#` metadata headers, fixed 17-significant-digit numbers,
//! and the run manifest written beside every output.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Locale-free scientific notation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        let mut out = Vec::new();
        for (k, v) in &self.meta {
            out.extend_from_slice(format!("# {k}={v}\n").as_bytes());
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.columns)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        Ok(out)
    }
}

/// A CSV read back: `#` metadata, header and string cells.
pub struct ReadTable {
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ReadTable {
    pub fn read(path: &str) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
        let mut meta = BTreeMap::new();
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            if let Some((k, v)) = line.split_once('=') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(|c| c.trim().to_string()).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(|c| c.trim().to_string()).collect()))
            .collect::<Result<_, _>>()?;
        Ok(ReadTable { meta, columns, rows })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric column; empty cells read as NaN.
    pub fn numbers(&self, name: &str) -> CliResult<Vec<f64>> {
        let idx = self
            .column(name)
            .ok_or_else(|| CliError::Usage(format!("input CSV lacks column '{name}'")))?;
        self.rows
            .iter()
            .map(|row| {
                let cell = row.get(idx).map(String::as_str).unwrap_or("");
                if cell.is_empty() {
                    return Ok(f64::NAN);
                }
                cell.parse::<f64>()
                    .map_err(|_| CliError::Usage(format!("column '{name}': '{cell}' is not a number")))
            })
            .collect()
    }

    pub fn meta_number(&self, key: &str) -> CliResult<f64> {
        self.meta
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| CliError::Usage(format!("input CSV lacks '# {key}=...' metadata")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to repeat a run: passing this file back as `--config`
/// reuses `parameters`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub parameters: Value,
    pub started_unix_seconds: f64,
    pub wall_clock_seconds: f64,
    pub status: String,
    pub outputs: Vec<OutputDigest>,
}

pub struct Run {
    command: &'static str,
    parameters: Value,
    started: SystemTime,
    clock: Instant,
}

impl Run {
    pub fn start(command: &'static str, parameters: &impl Serialize) -> Self {
        Run {
            command,
            parameters: serde_json::to_value(parameters).expect("parameters serialize"),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    /// Writes `bytes` to `path` and the manifest to `<path>.manifest.json`.
    pub fn finish(self, path: &str, bytes: &[u8], status: &str) -> CliResult<()> {
        let io = |e: std::io::Error| CliError::Io(format!("{path}: {e}"));
        if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(io)?;
        }
        std::fs::write(path, bytes).map_err(io)?;
        let manifest = RunManifest {
            command: self.command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: self.parameters,
            started_unix_seconds: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            wall_clock_seconds: self.clock.elapsed().as_secs_f64(),
            status: status.to_string(),
            outputs: vec![OutputDigest { path: path.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() }],
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        let mpath = format!("{path}.manifest.json");
        std::fs::write(&mpath, text + "\n").map_err(|e| CliError::Io(format!("{mpath}: {e}")))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
