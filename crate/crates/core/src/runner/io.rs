//! Trace CSV, state snapshots and verdict files.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FlowTrace, TraceRow};
use crate::geometry::MetricState;
use crate::grid::{BaseGrid, ScalarField};

/// Version tag of the sign and normalization conventions baked into
/// snapshots. Bump when any convention changes.
pub const CONVENTION_TAG: &str = "kt-frame/v1: e1234>0, g=-w(J.,.), H=-dw(J,J,J), torsion=-H, s=<rho,w>";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> IoError + '_ {
    move |source| IoError::Json {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes one header line followed by one line per row, columns in
/// [`TraceRow::COLUMNS`] order, shortest round-trip float formatting.
pub fn emit_csv(trace: &FlowTrace, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in &trace.rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    if trace.rows.is_empty() {
        w.write_record(TraceRow::COLUMNS).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<TraceRow>, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut r = csv::Reader::from_reader(BufReader::new(file));
    let header = r.headers().map_err(csv_err(path))?;
    if header.iter().ne(TraceRow::COLUMNS) {
        return Err(IoError::Invalid {
            path: path.to_path_buf(),
            reason: "unexpected column layout".into(),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_err(path))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub convention: String,
    pub n: usize,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl Snapshot {
    pub fn from_state(m: &MetricState) -> Self {
        Self {
            convention: CONVENTION_TAG.into(),
            n: m.grid().n(),
            u: m.u.values().to_vec(),
            lambda: m.lambda.values().to_vec(),
            p: m.p.values().to_vec(),
            q: m.q.values().to_vec(),
        }
    }

    pub fn into_state(self) -> crate::Result<MetricState> {
        let grid = BaseGrid::new(self.n)?;
        MetricState::new(
            ScalarField::from_values(grid, self.u)?,
            ScalarField::from_values(grid, self.lambda)?,
            ScalarField::from_values(grid, self.p)?,
            ScalarField::from_values(grid, self.q)?,
        )
    }
}

/// Writes the four coefficient arrays (row-major, x-major index) as JSON.
pub fn emit_snapshot(m: &MetricState, path: &Path) -> Result<(), IoError> {
    write_json(&Snapshot::from_state(m), path)
}

pub fn load_snapshot(path: &Path) -> Result<MetricState, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let snap: Snapshot = serde_json::from_reader(BufReader::new(file)).map_err(json_err(path))?;
    if snap.convention != CONVENTION_TAG {
        return Err(IoError::Invalid {
            path: path.to_path_buf(),
            reason: format!("convention tag `{}` does not match `{CONVENTION_TAG}`", snap.convention),
        });
    }
    snap.into_state().map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), IoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(json_err(path))?;
    writeln!(w).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Termination;
    use crate::vaisman::make_noncsc_vaisman;

    fn row(t: f64) -> TraceRow {
        TraceRow {
            t,
            lambda_mean: 1.0,
            lambda_var: 0.0,
            sigma1_mean: -1.0 / 3.0,
            sigma1_var: 1e-17 * t,
            sigma2_mean: 0.1 + 0.2,
            sigma2_var: 0.0,
            s_mean: -std::f64::consts::PI,
            s_var: 2.0f64.sqrt(),
            pluriclosed_defect: 5e-324,
            lck_defect: 0.0,
            vaisman_defect: 1.0e-300,
            char1: -1.0,
            char2: 0.0,
            fiber_residual: 1.234567890123456e-13,
            mu_drift: 0.0,
            sigma1_ode_residual: 0.0,
            lambda_relation_residual: 0.0,
            fiber_residual_fd: 0.0,
            sigma1_ode_residual_fd: 0.0,
            positivity_margin: 0.9,
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let trace = FlowTrace {
            rows: vec![row(0.0), row(0.1), row(0.30000000000000004)],
            termination: Termination::Completed,
        };
        emit_csv(&trace, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap(), TraceRow::COLUMNS.join(","));
        let back = read_csv(&path).unwrap();
        for (a, b) in back.iter().zip(&trace.rows) {
            assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seed.json");
        let m = make_noncsc_vaisman(BaseGrid::new(16).unwrap(), 0.2, (1, 2)).unwrap();
        emit_snapshot(&m, &path).unwrap();
        let back = load_snapshot(&path).unwrap();
        for (a, b) in m.fields().iter().zip(back.fields()) {
            assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn errors_name_the_path() {
        let err = load_snapshot(Path::new("/nonexistent/seed.json")).unwrap_err();
        assert!(err.to_string().starts_with("/nonexistent/seed.json"));
    }
}
