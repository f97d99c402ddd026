use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Forcing `g` sampled at every half step `t_j = j·dt/2`, `j = 0..=2N`, so
/// each RK4 stage of an `N`-step run reads an exact sample.
#[derive(Clone, Debug)]
pub struct ForcingRecord {
    samples: Vec<SpectralField>,
}

impl ForcingRecord {
    pub fn new(samples: Vec<SpectralField>) -> Result<Self> {
        if samples.len() < 3 || samples.len() % 2 == 0 {
            return Err(Error::config(
                "forcing",
                format!("need 2N+1 half-step samples, got {}", samples.len()),
            ));
        }
        let grid = Arc::clone(samples[0].grid());
        for s in &samples {
            grid.check_same(s.grid())?;
        }
        Ok(ForcingRecord { samples })
    }

    /// Samples `g(t)` at the half steps of an `steps`-step run over `[0, horizon]`.
    pub fn from_fn(steps: usize, horizon: f64, g: impl Fn(f64) -> SpectralField) -> Result<Self> {
        let h = horizon / (2 * steps) as f64;
        Self::new((0..=2 * steps).map(|j| g(j as f64 * h)).collect())
    }

    pub fn zeros(grid: &Arc<Grid>, steps: usize) -> Self {
        ForcingRecord {
            samples: vec![SpectralField::zeros(grid); 2 * steps + 1],
        }
    }

    pub fn steps(&self) -> usize {
        (self.samples.len() - 1) / 2
    }

    pub fn samples(&self) -> &[SpectralField] {
        &self.samples
    }

    pub fn sample(&self, j: usize) -> &SpectralField {
        &self.samples[j]
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.samples[0].grid()
    }

    pub fn into_samples(self) -> Vec<SpectralField> {
        self.samples
    }
}

/// Cumulative energy bookkeeping at one snapshot.
#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub l2_norm: f64,
    /// `ε ∫₀ᵗ ‖u_x‖²`.
    pub eps_dissipation: f64,
    /// `∫₀ᵗ (F(u), u)`, i.e. `∫‖D^{1/2}Gu‖²` for the GDG law.
    pub damping_dissipation: f64,
    /// `∫₀ᵗ ‖D^{1/2}u‖²`.
    pub smoothing_budget: f64,
    /// `∫₀ᵗ (g, u)`.
    pub forcing_work: f64,
    pub i1: f64,
    pub i2: f64,
}

/// Time-stamped snapshots with the energy ledger of one integration.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub(crate) times: Vec<f64>,
    pub(crate) states: Vec<SpectralField>,
    pub(crate) ledger: Vec<LedgerRow>,
    pub(crate) step_times: Vec<f64>,
    pub(crate) step_norms: Vec<f64>,
    pub(crate) half_steps: Option<Vec<SpectralField>>,
    pub(crate) initial_norm: f64,
    pub(crate) dt: f64,
    pub(crate) warnings: Vec<String>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn ledger(&self) -> &[LedgerRow] {
        &self.ledger
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn first_state(&self) -> &SpectralField {
        &self.states[0]
    }

    pub fn final_state(&self) -> &SpectralField {
        self.states.last().expect("trajectory holds at least one state")
    }

    /// L² norm after every integrator step (including `t = 0`).
    pub fn step_norms(&self) -> &[f64] {
        &self.step_norms
    }

    pub fn step_times(&self) -> &[f64] {
        &self.step_times
    }

    /// States at every half step, when dense output was requested.
    pub fn half_steps(&self) -> Option<&[SpectralField]> {
        self.half_steps.as_deref()
    }

    /// L² norm of the state the integration started from.
    pub fn initial_norm(&self) -> f64 {
        self.initial_norm
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0).max(self.times.first().copied().unwrap_or(0.0))
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Whether the per-step L² norms never increase beyond a relative
    /// roundoff allowance `slack`.
    pub fn norm_nonincreasing(&self, slack: f64) -> bool {
        self.step_norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack))
    }

    /// Reindexes a backward-in-time run onto forward time `t = T − τ`.
    pub(crate) fn reversed(mut self, horizon: f64) -> Self {
        let flip = |v: &mut Vec<f64>| {
            v.reverse();
            v.iter_mut().for_each(|t| *t = horizon - *t);
        };
        flip(&mut self.times);
        flip(&mut self.step_times);
        self.states.reverse();
        self.step_norms.reverse();
        self.ledger.reverse();
        for row in &mut self.ledger {
            row.t = horizon - row.t;
        }
        if let Some(h) = self.half_steps.as_mut() {
            h.reverse();
        }
        self
    }
}
