use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{energy_residual, evolve, EvolutionParams, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

#[derive(Clone, Debug, Serialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    /// `∫₀ᵀ ‖D^{1/2}u‖² dt` from the fine-step ledger.
    pub smoothing_budget: f64,
    pub eps_dissipation: f64,
    pub damping_dissipation: f64,
    pub final_norm: f64,
    pub energy_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ViscositySweep {
    pub entries: Vec<SweepEntry>,
    /// `sup_t ‖u_{ε_i}(t) − u_{ε_{i+1}}(t)‖` over common snapshots.
    pub distances: Vec<f64>,
}

impl ViscositySweep {
    /// `(max − min) / min` of the smoothing budgets.
    pub fn budget_spread(&self) -> f64 {
        spread(self.entries.iter().map(|e| e.smoothing_budget))
    }
}

/// `(max − min) / min` over a nonempty set of positive values.
pub fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (hi - lo) / lo
}

/// Runs the same initial state for each viscosity in `eps_list` (strictly
/// decreasing, positive), in parallel.
pub fn viscosity_sweep(u0: &SpectralField, eps_list: &[f64], params: &EvolutionParams) -> Result<ViscositySweep> {
    if eps_list.is_empty() {
        return Err(Error::config("eps_list", "must not be empty"));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::config("eps_list", "every viscosity must be positive"));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::config("eps_list", "must be strictly decreasing"));
    }
    let runs: Vec<Trajectory> = eps_list
        .par_iter()
        .map(|eps| evolve(u0, &params.clone().with_epsilon(*eps), None))
        .collect::<Result<_>>()?;
    let entries = eps_list
        .iter()
        .zip(&runs)
        .map(|(eps, traj)| {
            let last = traj.ledger().last().expect("nonempty ledger");
            Ok(SweepEntry {
                epsilon: *eps,
                smoothing_budget: last.smoothing_budget,
                eps_dissipation: last.eps_dissipation,
                damping_dissipation: last.damping_dissipation,
                final_norm: last.l2_norm,
                energy_residual: energy_residual(traj)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let distances = runs
        .windows(2)
        .map(|w| {
            w[0].states()
                .iter()
                .zip(w[1].states())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ViscositySweep { entries, distances })
}
