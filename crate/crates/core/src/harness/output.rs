use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{row_residual, ForcingRecord, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

pub const TRAJECTORY_HEADER: [&str; 9] = [
    "t",
    "l2_norm",
    "hs_norm",
    "I1",
    "I2",
    "eps_dissipation_cum",
    "damping_dissipation_cum",
    "smoothing_budget_cum",
    "energy_residual",
];

/// One snapshot of a trajectory file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub l2_norm: f64,
    pub hs_norm: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    pub eps_dissipation_cum: f64,
    pub damping_dissipation_cum: f64,
    pub smoothing_budget_cum: f64,
    /// Energy defect relative to `½‖u₀‖²` (absolute for zero data).
    pub energy_residual: f64,
}

pub fn trajectory_rows(traj: &Trajectory, hs_index: f64) -> Vec<TrajectoryRow> {
    let e0 = traj.ledger().first().map_or(0.0, |r| 0.5 * r.i2);
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    traj.ledger()
        .iter()
        .zip(traj.states())
        .map(|(r, u)| TrajectoryRow {
            t: r.t,
            l2_norm: r.l2_norm,
            hs_norm: u.sobolev_norm(hs_index),
            i1: r.i1,
            i2: r.i2,
            eps_dissipation_cum: r.eps_dissipation,
            damping_dissipation_cum: r.damping_dissipation,
            smoothing_budget_cum: r.smoothing_budget,
            energy_residual: row_residual(r, e0) / scale,
        })
        .collect()
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(TRAJECTORY_HEADER) {
        return Err(Error::config(path.display().to_string(), format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| csv_error(path, e))).collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Half-spectrum coefficients `k = 0..=K` as `[re, im]` pairs.
pub fn coefficient_pairs(u: &SpectralField) -> Vec<[f64; 2]> {
    u.coefficients().iter().map(|c| [c.re, c.im]).collect()
}

pub fn field_from_pairs(grid: &Arc<Grid>, pairs: &[[f64; 2]]) -> Result<SpectralField> {
    SpectralField::from_coefficients(grid, pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
}

/// Final state of a run in both representations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub t: f64,
    pub coefficients: Vec<[f64; 2]>,
    pub samples: Vec<f64>,
}

impl StateRecord {
    pub fn new(t: f64, u: &SpectralField) -> Result<Self> {
        Ok(StateRecord {
            t,
            coefficients: coefficient_pairs(u),
            samples: u.to_physical()?,
        })
    }
}

/// Control `k(t_j)` at every half step: columns `j, t, re_0, im_0, …, re_K, im_K`.
pub fn write_control_csv(path: &Path, control: &ForcingRecord, horizon: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let modes = control.grid().modes();
    let mut header = vec!["j".to_string(), "t".to_string()];
    for k in 0..=modes {
        header.push(format!("re_{k}"));
        header.push(format!("im_{k}"));
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let h = horizon / (control.samples().len() - 1) as f64;
    for (j, k) in control.samples().iter().enumerate() {
        let mut record = vec![j.to_string(), (j as f64 * h).to_string()];
        for c in k.coefficients() {
            record.push(c.re.to_string());
            record.push(c.im.to_string());
        }
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_control_csv(path: &Path, grid: &Arc<Grid>) -> Result<ForcingRecord> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let expected = 2 + 2 * (grid.modes() + 1);
    let mut samples = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: record.len(),
            });
        }
        let values: Vec<f64> = record
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        let pairs: Vec<[f64; 2]> = values.chunks(2).map(|c| [c[0], c[1]]).collect();
        samples.push(field_from_pairs(grid, &pairs)?);
    }
    ForcingRecord::new(samples)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::config(path.display().to_string(), format!("{other:?}")),
    }
}
