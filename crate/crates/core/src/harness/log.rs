//! Run logs: fixed-rate records written as CSV plus a JSON manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunStatus {
    Completed,
    Aborted { time: f64, reason: String },
}

impl RunStatus {
    pub fn is_aborted(&self) -> bool {
        matches!(self, RunStatus::Aborted { .. })
    }
}

/// Absolute actuator ranges of the plant, for saturation metrics.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSummary {
    pub rotor_speed: [f64; 2],
    pub tilt: [f64; 2],
    pub surface: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub config_hash: String,
    pub controller_rate_hz: f64,
    pub plant_rate_hz: f64,
    pub rows: usize,
    pub status: RunStatus,
    pub limits: LimitSummary,
    pub columns: Vec<Column>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub manifest: Manifest,
    pub rows: Vec<Vec<f64>>,
}

impl RunLog {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.manifest.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn status(&self) -> &RunStatus {
        &self.manifest.status
    }

    /// Checks column counts and uniform, gap-free timestamps.
    pub fn validate(&self) -> Result<()> {
        let n = self.manifest.columns.len();
        if self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config("row length differs from column count".into()));
        }
        if self.rows.len() != self.manifest.rows {
            return Err(Error::Config("row count differs from manifest".into()));
        }
        let Some(ti) = self.column_index("t") else {
            return Err(Error::Config("log has no `t` column".into()));
        };
        let dt = 1.0 / self.manifest.controller_rate_hz;
        for (k, r) in self.rows.iter().enumerate() {
            if (r[ti] - k as f64 * dt).abs() > 1e-9 * (1.0 + k as f64 * dt) {
                return Err(Error::Config(format!("timestamp gap at row {k}")));
            }
        }
        Ok(())
    }
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `<dir>/<stem>.csv` and its manifest; returns the CSV path.
pub fn write_log(log: &RunLog, dir: &Path, stem: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(log.manifest.columns.iter().map(|c| c.name.as_str()))?;
    for row in &log.rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    let json = serde_json::to_string_pretty(&log.manifest)?;
    std::fs::write(manifest_path(&csv_path), json + "\n")?;
    Ok(csv_path)
}

pub fn parse_manifest(text: &str) -> Result<Manifest> {
    let m: Manifest = serde_json::from_str(text)?;
    if m.format_version != FORMAT_VERSION {
        return Err(Error::Config(format!(
            "unsupported log format {}",
            m.format_version
        )));
    }
    if !(m.controller_rate_hz.is_finite() && m.controller_rate_hz > 0.0) {
        return Err(Error::Config("manifest controller rate must be positive".into()));
    }
    Ok(m)
}

/// Parses CSV text against a manifest.
pub fn parse_csv(text: &str, manifest: Manifest) -> Result<RunLog> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let names: Vec<&str> = manifest.columns.iter().map(|c| c.name.as_str()).collect();
    if header != names {
        return Err(Error::Config("CSV header does not match manifest columns".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number `{f}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != names.len() {
            return Err(Error::Config("ragged CSV row".into()));
        }
        rows.push(row);
    }
    let log = RunLog { manifest, rows };
    log.validate()?;
    Ok(log)
}

/// Reads a CSV log and its JSON sidecar.
pub fn read_log(csv_path: &Path) -> Result<RunLog> {
    let manifest = parse_manifest(&std::fs::read_to_string(manifest_path(csv_path))?)?;
    parse_csv(&std::fs::read_to_string(csv_path)?, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_log() -> RunLog {
        RunLog {
            manifest: Manifest {
                format_version: FORMAT_VERSION,
                scenario: "tiny".into(),
                seed: 1,
                config_hash: "00".into(),
                controller_rate_hz: 100.0,
                plant_rate_hz: 500.0,
                rows: 3,
                status: RunStatus::Aborted {
                    time: 0.02,
                    reason: "test".into(),
                },
                limits: LimitSummary::default(),
                columns: vec![
                    Column {
                        name: "t".into(),
                        unit: "s".into(),
                    },
                    Column {
                        name: "x".into(),
                        unit: "m".into(),
                    },
                ],
            },
            rows: vec![vec![0.0, 0.1], vec![0.01, 1.0 / 3.0], vec![0.02, -2.5e-17]],
        }
    }

    #[test]
    fn write_then_read_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let log = tiny_log();
        let p = write_log(&log, dir.path(), "run").unwrap();
        assert_eq!(read_log(&p).unwrap(), log);
    }

    #[test]
    fn header_mismatch_and_gaps_are_rejected() {
        let m = tiny_log().manifest;
        assert!(parse_csv("t,y\n0,1\n0.01,1\n0.02,1\n", m.clone()).is_err());
        assert!(parse_csv("t,x\n0,1\n0.02,1\n0.03,1\n", m.clone()).is_err());
        assert!(parse_csv("t,x\n0,1\n0.01,zz\n0.02,1\n", m).is_err());
    }
}
