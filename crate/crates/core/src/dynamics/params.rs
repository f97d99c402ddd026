use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{DampingProfile, SpectralField};

/// Closed-loop damping term added to the equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackLaw {
    /// No damping.
    Off,
    /// `−G(D(Gu))`.
    Gdg,
    /// `−G(G u)`, the closed loop of `h = −G* u`.
    Lo,
}

/// Parameters of `u_t + ℋu_xx + α uu_x = ε u_xx − F(u) + g`, where `F` is the
/// feedback selected by [`FeedbackLaw`].
#[derive(Clone, Debug)]
pub struct EvolutionParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub feedback: FeedbackLaw,
    pub horizon: f64,
    pub dt: f64,
    pub profile: DampingProfile,
    /// Keep every `snapshot_stride`-th step (the final state is always kept).
    pub snapshot_stride: usize,
    pub cfl_factor: f64,
}

impl EvolutionParams {
    pub const DEFAULT_CFL_FACTOR: f64 = 0.5;

    /// Linear damped inviscid flow (`α = 0`, `ε = 0`, GDG feedback).
    pub fn new(profile: DampingProfile, horizon: f64, dt: f64) -> Self {
        EvolutionParams {
            epsilon: 0.0,
            alpha: 0.0,
            feedback: FeedbackLaw::Gdg,
            horizon,
            dt,
            profile,
            snapshot_stride: 1,
            cfl_factor: Self::DEFAULT_CFL_FACTOR,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_feedback(mut self, feedback: FeedbackLaw) -> Self {
        self.feedback = feedback;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn damping_on(&self) -> bool {
        self.feedback != FeedbackLaw::Off
    }

    /// Advective step bound `cfl_factor / (K (1 + max|u₀|))`.
    pub fn cfl_limit(&self, u0: &SpectralField) -> Result<f64> {
        let peak = u0.to_physical()?.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(self.cfl_factor / (u0.modes() as f64 * (1.0 + peak)))
    }

    /// Number of steps and the uniform step that lands exactly on the horizon.
    /// A horizon shorter than `dt` is covered by a single step.
    pub fn step_count(&self) -> (usize, f64) {
        let n = ((self.horizon / self.dt) - 1e-9).ceil().max(1.0) as usize;
        (n, self.horizon / n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config("physics.epsilon", format!("must lie in [0, 1], got {}", self.epsilon)));
        }
        if !self.alpha.is_finite() {
            return Err(Error::config("physics.alpha", "must be finite"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::config("physics.T", format!("must be positive, got {}", self.horizon)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("physics.dt", format!("must be positive, got {}", self.dt)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::config("output.stride", "must be at least 1"));
        }
        if !(self.cfl_factor > 0.0) {
            return Err(Error::config("physics.cfl_factor", "must be positive"));
        }
        Ok(())
    }
}
