//! Exact controllability of the damped equation by the Hilbert uniqueness
//! method, its Picard extension to the nonlinear equation, and the
//! closed-loop feedback laws used for comparison.

mod cg;
mod feedback;
mod gramian;
mod linear;
mod nonlinear;

pub use cg::{conjugate_gradient, CgOutcome, STAGNATION_FACTOR, STAGNATION_WINDOW};
pub use feedback::closed_loop_feedback;
pub use gramian::{control_forcing, gramian_apply, Gramian};
pub use linear::{duality_defect, solve_linear_control};
pub use nonlinear::solve_nonlinear_control;

use serde::{Deserialize, Serialize};

use crate::dynamics::{EvolutionParams, ForcingRecord};
use crate::error::{Error, Result};
use crate::spectral::{SobolevIndex, SpectralField};

/// Solver tolerances and limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlSettings {
    pub cg_tol: f64,
    pub max_iter: usize,
    pub picard_tol: f64,
    pub max_picard: usize,
    /// Upper bound on `‖u0‖_s` and `‖u1‖_s` for the nonlinear problem.
    pub delta: f64,
    /// Accept control regularities outside the range covered by the theory.
    pub experimental_s: bool,
}

impl Default for ControlSettings {
    fn default() -> Self {
        ControlSettings {
            cg_tol: 1e-8,
            max_iter: 500,
            picard_tol: 1e-9,
            max_picard: 50,
            delta: 1e-2,
            experimental_s: false,
        }
    }
}

impl ControlSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(Error::config("control.cg_tol", format!("must lie in (0, 1), got {}", self.cg_tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::config("control.max_iter", "must be at least 1"));
        }
        if !(self.picard_tol > 0.0) {
            return Err(Error::config("control.picard_tol", "must be positive"));
        }
        if self.max_picard == 0 {
            return Err(Error::config("control.max_picard", "must be at least 1"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::config("control.delta", "must be positive"));
        }
        Ok(())
    }
}

/// Steer `u0` to `u1` in time `horizon` with a control in `L²(0,T; H^s)`.
#[derive(Clone, Debug)]
pub struct ControlProblem {
    pub u0: SpectralField,
    pub u1: SpectralField,
    pub horizon: f64,
    pub s: SobolevIndex,
    pub params: EvolutionParams,
    pub settings: ControlSettings,
}

impl ControlProblem {
    pub fn new(u0: SpectralField, u1: SpectralField, horizon: f64, s: impl Into<SobolevIndex>, params: EvolutionParams) -> Self {
        ControlProblem {
            u0,
            u1,
            horizon,
            s: s.into(),
            params,
            settings: ControlSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: ControlSettings) -> Self {
        self.settings = settings;
        self
    }

    /// Validated copy with the roundoff-level means of `u0`, `u1` removed.
    fn prepared(&self, nonlinear: bool) -> Result<ControlProblem> {
        self.validate(nonlinear)?;
        let mut prob = self.clone();
        prob.u0 = prob.u0.without_mean();
        prob.u1 = prob.u1.without_mean();
        Ok(prob)
    }

    fn validate(&self, nonlinear: bool) -> Result<()> {
        self.settings.validate()?;
        self.u0.check_grid(&self.u1)?;
        self.u0.grid().check_same(self.params.profile.grid())?;
        if !self.u0.is_zero_mean() {
            return Err(Error::config("initial", "initial state must have zero mean"));
        }
        if !self.u1.is_zero_mean() {
            return Err(Error::config("target", "target state must have zero mean"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("physics.T", format!("must be positive, got {}", self.horizon)));
        }
        let s = self.s.value();
        let covered = s > 0.5 && s <= 2.0;
        let allowed = if nonlinear { covered } else { covered || s == 0.0 };
        if !allowed && !self.settings.experimental_s {
            let range = if nonlinear { "(1/2, 2]" } else { "{0} or (1/2, 2]" };
            return Err(Error::config("control.s", format!("must lie in {range}, got {s}")));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::config("control.s", format!("must be nonnegative, got {s}")));
        }
        if nonlinear {
            let delta = self.settings.delta;
            for (name, u) in [("initial", &self.u0), ("target", &self.u1)] {
                let n = u.sobolev_norm(self.s);
                if n >= delta {
                    return Err(Error::config(
                        name,
                        format!("H^{s} norm {n:.3e} is not below the smallness threshold delta = {delta:.3e}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ControlSolution {
    /// HUM terminal datum `v_T` from the last Gramian inversion.
    pub v_terminal: SpectralField,
    /// Control `k` at every half step of the horizon.
    pub control: ForcingRecord,
    /// Total CG iterations over all Gramian inversions.
    pub cg_iterations: usize,
    pub cg_residual: f64,
    pub cg_history: Vec<f64>,
    pub picard_iterations: usize,
    pub picard_increments: Vec<f64>,
    /// `‖u(T) − u1‖_s / max(‖u1‖_s, 1e−14)` from an independent forward solve.
    pub terminal_error: f64,
    /// State reached by the verification solve.
    pub terminal_state: SpectralField,
    /// `∫₀ᵀ ‖k‖²_s dt`.
    pub control_energy: f64,
}

/// `∫₀ᵀ f` from samples at the half steps `t_j = jT/(2N)` (Simpson per step).
pub fn simpson_half_steps(values: &[f64], horizon: f64) -> f64 {
    let steps = (values.len() - 1) / 2;
    let dt = horizon / steps as f64;
    (0..steps)
        .map(|n| values[2 * n] + 4.0 * values[2 * n + 1] + values[2 * n + 2])
        .sum::<f64>()
        * dt
        / 6.0
}

fn relative_error(reached: &SpectralField, target: &SpectralField, s: SobolevIndex) -> f64 {
    (reached - target).sobolev_norm(s) / target.sobolev_norm(s).max(1e-14)
}
