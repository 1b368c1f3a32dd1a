//! File formats: matrix CSV/JSON, trajectory CSV, report JSON, sweep CSV and
//! run manifests.
//!
//! CSV numbers are written with 17 significant digits so every `f64` reads
//! back to the same bits. JSON goes through `serde_json`, whose shortest
//! round-trip formatting is likewise lossless.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::analysis::{InequalityReport, SweepPoint};
use crate::chain::TransitionMatrix;
use crate::experiment::{MeasurementRecord, Trajectory};
use crate::quantum::ContextId;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Decimal with 17 significant digits; scientific notation for very large
/// or very small magnitudes.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..=15).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

pub fn matrix_csv(m: &TransitionMatrix) -> String {
    let n = m.n();
    let mut out = String::new();
    for r in 0..n {
        let row: Vec<String> = (0..n).map(|c| fmt17(m.get(r, c))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

pub fn matrix_json(m: &TransitionMatrix) -> String {
    let n = m.n();
    let doc = MatrixJson {
        n,
        entries: (0..n).map(|r| (0..n).map(|c| m.get(r, c)).collect()).collect(),
    };
    serde_json::to_string(&doc).expect("matrix serializes")
}

pub fn parse_matrix_json(text: &str) -> Result<TransitionMatrix, FormatError> {
    let doc: MatrixJson = serde_json::from_str(text)?;
    let flat: Vec<f64> = doc.entries.into_iter().flatten().collect();
    TransitionMatrix::from_entries(doc.n, flat).map_err(|e| FormatError::Parse {
        line: 1,
        message: e.to_string(),
    })
}

pub fn parse_matrix_csv(text: &str) -> Result<TransitionMatrix, FormatError> {
    let mut flat = Vec::new();
    let mut rows = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        for cell in line.split(',') {
            flat.push(cell.trim().parse::<f64>().map_err(|e| FormatError::Parse {
                line: i + 1,
                message: format!("{cell:?}: {e}"),
            })?);
        }
        rows += 1;
    }
    TransitionMatrix::from_entries(rows, flat).map_err(|e| FormatError::Parse {
        line: rows,
        message: e.to_string(),
    })
}

pub const TRAJECTORY_HEADER: &str = "round,context,s1,s2,s3,chain_state,is_error";

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(32 * (traj.records.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in &traj.records {
        let [s1, s2, s3] = r.outcomes;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.round, r.context, s1, s2, s3, r.chain_state, r.is_error
        ));
    }
    out
}

/// Parses the records of a trajectory CSV.
pub fn parse_trajectory_csv(text: &str) -> Result<Vec<MeasurementRecord>, FormatError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRAJECTORY_HEADER => {}
        _ => {
            return Err(FormatError::Parse {
                line: 1,
                message: format!("expected header {TRAJECTORY_HEADER:?}"),
            })
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |message: String| FormatError::Parse { line: i + 1, message };
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 7 {
            return Err(bad(format!("expected 7 fields, found {}", cells.len())));
        }
        let int = |s: &str| s.parse::<i64>().map_err(|e| bad(format!("{s:?}: {e}")));
        let sign = |s: &str| match int(s)? {
            v @ (1 | -1) => Ok(v as i8),
            v => Err(bad(format!("outcome {v} is not ±1"))),
        };
        let context = ContextId::new(int(cells[1])? as usize).map_err(|e| bad(e.to_string()))?;
        let record = MeasurementRecord {
            round: int(cells[0])? as usize,
            context,
            outcomes: [sign(cells[2])?, sign(cells[3])?, sign(cells[4])?],
            chain_state: int(cells[5])? as usize,
            is_error: cells[6].parse().map_err(|e| bad(format!("{:?}: {e}", cells[6])))?,
        };
        if record.chain_state >= 48 {
            return Err(bad(format!("chain state {} out of range", record.chain_state)));
        }
        if record != MeasurementRecord::from_chain_state(record.round, record.chain_state) {
            return Err(bad("record fields disagree with chain state".into()));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn report_json(report: &InequalityReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub const SWEEP_HEADER: &str = "p,empirical,analytic,std_error,violated";

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for pt in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(pt.p),
            fmt17(pt.report.value),
            fmt17(pt.analytic),
            fmt17(pt.report.std_error),
            pt.report.violated
        ));
    }
    out
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub bytes: usize,
    pub sha256: String,
}

/// Provenance record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    pub outputs: Vec<OutputDigest>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: Option<u64>, started_at: f64) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config,
            seed,
            started_at,
            finished_at: started_at,
            outputs: Vec::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(OutputDigest {
            path: path.to_path_buf(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn to_json(&mut self) -> String {
        self.finished_at = unix_now();
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
