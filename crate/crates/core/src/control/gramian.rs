use num_complex::Complex64;

use crate::dynamics::{evolve, evolve_adjoint_dense, EvolutionParams, FeedbackLaw, ForcingRecord};
use crate::error::{Error, Result};
use crate::spectral::{bessel_weight, OperatorKernel, SobolevIndex, SpectralField};

/// The control-to-state operator `Γ₋ₛ`:
///
/// `vT ↦ (1−∂²)^s u(T)`, where `u` solves the damped linear equation from rest
/// forced by `G D^{1/2} k` with the HUM control `k = (1−∂²)^{−s} D^{1/2} G v`
/// and `v` is the adjoint state ending at `vT`.
#[derive(Clone, Debug)]
pub struct Gramian {
    params: EvolutionParams,
    s: f64,
}

impl Gramian {
    pub fn new(params: &EvolutionParams, horizon: f64, s: impl Into<SobolevIndex>) -> Result<Self> {
        if params.alpha != 0.0 {
            return Err(Error::Domain("the Gramian is built on the linear flow (alpha = 0)".into()));
        }
        if params.feedback != FeedbackLaw::Gdg {
            return Err(Error::Domain("the Gramian is built on the GDG-damped flow".into()));
        }
        let s = s.into().value();
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Domain(format!("control regularity s must be nonnegative, got {s}")));
        }
        let params = params.clone().with_horizon(horizon).with_stride(usize::MAX);
        params.validate()?;
        Ok(Gramian { params, s })
    }

    pub fn params(&self) -> &EvolutionParams {
        &self.params
    }

    pub fn horizon(&self) -> f64 {
        self.params.horizon
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn steps(&self) -> usize {
        self.params.step_count().0
    }

    /// HUM control `k(t_j)` at every half step, from the adjoint ending at `vT`.
    pub fn control(&self, v_terminal: &SpectralField) -> Result<ForcingRecord> {
        let adj = evolve_adjoint_dense(v_terminal, &self.params)?;
        let half = adj.half_steps().expect("dense adjoint run");
        let mut kernel = OperatorKernel::new(v_terminal.grid());
        let profile = &self.params.profile;
        let n = v_terminal.modes() + 1;
        let samples = half
            .iter()
            .map(|v| {
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                kernel.apply_sqrt_d_g(profile, v.coefficients(), &mut out);
                for (k, c) in out.iter_mut().enumerate() {
                    *c *= bessel_weight(k, -self.s);
                }
                SpectralField::from_raw(v_terminal.grid(), out)
            })
            .collect();
        ForcingRecord::new(samples)
    }

    /// Forcing `G D^{1/2} k` generated by a control record.
    pub fn forcing(&self, control: &ForcingRecord) -> ForcingRecord {
        control_forcing(control, &self.params)
    }

    /// `u(T)` of the damped linear flow from `u0` under `forcing`.
    pub fn terminal_state(&self, u0: &SpectralField, forcing: Option<&ForcingRecord>) -> Result<SpectralField> {
        Ok(evolve(u0, &self.params, forcing)?.final_state().clone())
    }

    /// `(1−∂²)^s w`.
    pub fn lift(&self, w: &SpectralField) -> SpectralField {
        w.apply_real_multiplier(|k| bessel_weight(k, self.s))
    }

    pub fn apply(&self, v_terminal: &SpectralField) -> Result<SpectralField> {
        let k = self.control(v_terminal)?;
        let forcing = self.forcing(&k);
        let u_t = self.terminal_state(&SpectralField::zeros(v_terminal.grid()), Some(&forcing))?;
        Ok(self.lift(&u_t))
    }

    /// `(f, g)₋ₛ`, the inner product in which `Γ₋ₛ` is self-adjoint.
    pub fn inner(&self, f: &SpectralField, g: &SpectralField) -> f64 {
        f.inner_s(g, -self.s)
    }

    /// `∫₀ᵀ ‖k(t)‖²_s dt` by Simpson's rule on the half-step samples.
    pub fn control_energy(&self, control: &ForcingRecord) -> f64 {
        let values: Vec<f64> = control
            .samples()
            .iter()
            .map(|k| k.inner_s(k, self.s))
            .collect();
        super::simpson_half_steps(&values, self.horizon())
    }
}

/// Forcing `G D^{1/2} k(t_j)` for every sample of a control record.
pub fn control_forcing(control: &ForcingRecord, params: &EvolutionParams) -> ForcingRecord {
    let grid = control.grid();
    let mut kernel = OperatorKernel::new(grid);
    let n = grid.modes() + 1;
    let samples = control
        .samples()
        .iter()
        .map(|k| {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            kernel.apply_g_sqrt_d(&params.profile, k.coefficients(), &mut out);
            SpectralField::from_raw(grid, out)
        })
        .collect();
    ForcingRecord::new(samples).expect("control record already validated")
}

/// `Γ₋ₛ v` for a single terminal datum.
pub fn gramian_apply(
    v_terminal: &SpectralField,
    horizon: f64,
    s: impl Into<SobolevIndex>,
    params: &EvolutionParams,
) -> Result<SpectralField> {
    if !v_terminal.is_zero_mean() {
        return Err(Error::Domain("terminal datum must have zero mean".into()));
    }
    Gramian::new(params, horizon, s)?.apply(v_terminal)
}
