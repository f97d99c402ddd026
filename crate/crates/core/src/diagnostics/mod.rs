//! Post-processing of trajectories: conserved quantities, space-time norms,
//! decay fits, observability ratios, viscosity sweeps and commutator studies.

mod commutator;
mod decay;
mod sweep;

pub use commutator::{admissible_ratio_study, odd_progression_ratios, CommutatorStudy};
pub use decay::{fit_decay, fit_log_linear, DecayFit};
pub use sweep::{spread, viscosity_sweep, SweepEntry, ViscositySweep};

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{evolve, EvolutionParams, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{SobolevIndex, SpectralField};

/// `(I1, I2) = (∫u, ∫u²)`.
pub fn conserved_functionals(u: &SpectralField) -> (f64, f64) {
    (2.0 * PI * u.mean(), u.inner(u))
}

/// `sup_t ‖u(t)‖_s` over snapshots and `(∫₀ᵀ ‖u(t)‖²_{s+1/2} dt)^{1/2}` by the
/// trapezoidal rule on the snapshot times.
pub fn trajectory_norms(traj: &Trajectory, s: impl Into<SobolevIndex>) -> Result<(f64, f64)> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let s = s.into().value();
    let sup = traj.states().iter().map(|u| u.sobolev_norm(s)).fold(0.0, f64::max);
    let sq: Vec<f64> = traj.states().iter().map(|u| u.inner_s(u, s + 0.5)).collect();
    let integral: f64 = traj
        .times()
        .windows(2)
        .zip(sq.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum();
    Ok((sup, integral.max(0.0).sqrt()))
}

/// Both sides of `‖u₀‖² ≤ C (ε∫‖u_x‖² + ∫‖D^{1/2}Gu‖²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObservabilityReport {
    pub numerator: f64,
    pub denominator: f64,
    /// `numerator / denominator`; infinite when degenerate.
    pub ratio: f64,
    pub epsilon: f64,
    pub horizon: f64,
    pub modes: usize,
    pub degenerate: bool,
}

pub fn observability_ratio(u0: &SpectralField, params: &EvolutionParams) -> Result<ObservabilityReport> {
    if !params.damping_on() {
        return Err(Error::Domain("observability needs damping".into()));
    }
    if u0.max_abs_coefficient() == 0.0 {
        return Err(Error::Domain("observability ratio needs a nonzero initial state".into()));
    }
    let traj = evolve(u0, &params.clone().with_stride(usize::MAX), None)?;
    let last = traj.ledger().last().ok_or(Error::EmptyTrajectory)?;
    let numerator = u0.inner(u0);
    let denominator = last.eps_dissipation + last.damping_dissipation;
    let degenerate = !(denominator > 0.0);
    Ok(ObservabilityReport {
        numerator,
        denominator,
        ratio: if degenerate { f64::INFINITY } else { numerator / denominator },
        epsilon: params.epsilon,
        horizon: params.horizon,
        modes: u0.modes(),
        degenerate,
    })
}
