//! Time integration of `u_t + ℋu_xx + α uu_x = ε u_xx − F(u) + g` and of the
//! backward adjoint of its linear part.

mod integrator;
mod params;
mod trajectory;

pub use integrator::BLOWUP_THRESHOLD;
pub use params::{EvolutionParams, FeedbackLaw};
pub use trajectory::{ForcingRecord, LedgerRow, Trajectory};

use integrator::{integrate, Generator, RunOptions};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

fn run(
    u0: &SpectralField,
    params: &EvolutionParams,
    forcing: Option<&ForcingRecord>,
    dispersion_sign: f64,
    dense: bool,
) -> Result<Trajectory> {
    params.validate()?;
    if !u0.is_finite() {
        return Err(Error::Domain("initial state has non-finite coefficients".into()));
    }
    let gen = Generator {
        dispersion_sign,
        epsilon: params.epsilon,
        alpha: params.alpha,
        feedback: params.feedback,
        profile: &params.profile,
        forcing,
    };
    let opts = RunOptions {
        horizon: params.horizon,
        dt: params.dt,
        stride: params.snapshot_stride,
        dense,
    };
    let mut traj = integrate(u0, &gen, &opts)?;
    if params.alpha != 0.0 {
        let limit = params.cfl_limit(u0)?;
        if traj.dt > limit {
            let msg = format!("dt = {:.3e} exceeds the advective limit {:.3e}", traj.dt, limit);
            log::warn!("{msg}");
            traj.warnings.push(msg);
        }
    }
    Ok(traj)
}

/// Integrates forward from `u0` over `[0, params.horizon]`. The forcing, if
/// any, must carry `2N + 1` half-step samples for the `N` steps implied by
/// [`EvolutionParams::step_count`].
pub fn evolve(u0: &SpectralField, params: &EvolutionParams, forcing: Option<&ForcingRecord>) -> Result<Trajectory> {
    run(u0, params, forcing, 1.0, false)
}

/// [`evolve`] that also records every half-step state.
pub fn evolve_dense(
    u0: &SpectralField,
    params: &EvolutionParams,
    forcing: Option<&ForcingRecord>,
) -> Result<Trajectory> {
    run(u0, params, forcing, 1.0, true)
}

/// `S(t) u0` for the damped linear inviscid flow `u_t + ℋu_xx = −G(D(Gu))`.
pub fn semigroup_s(u0: &SpectralField, t: f64, params: &EvolutionParams) -> Result<SpectralField> {
    if params.alpha != 0.0 || params.epsilon != 0.0 || params.feedback != FeedbackLaw::Gdg {
        return Err(Error::Domain(
            "the damped semigroup needs alpha = 0, epsilon = 0 and GDG feedback".into(),
        ));
    }
    let p = params.clone().with_horizon(t).with_stride(usize::MAX);
    Ok(evolve(u0, &p, None)?.final_state().clone())
}

/// Solves the adjoint `−v_t + ℋv_xx = ε v_xx − F(v)` backward from `v(T) = vT`.
/// Snapshots are returned in forward time order, so `final_state` is `v(T)`
/// and `first_state` is `v(0)`.
pub fn evolve_adjoint(v_terminal: &SpectralField, params: &EvolutionParams) -> Result<Trajectory> {
    adjoint(v_terminal, params, false)
}

/// [`evolve_adjoint`] keeping every half-step state (forward time order).
pub fn evolve_adjoint_dense(v_terminal: &SpectralField, params: &EvolutionParams) -> Result<Trajectory> {
    adjoint(v_terminal, params, true)
}

fn adjoint(v_terminal: &SpectralField, params: &EvolutionParams, dense: bool) -> Result<Trajectory> {
    if params.alpha != 0.0 {
        return Err(Error::Domain("the adjoint is only defined for the linear flow (alpha = 0)".into()));
    }
    Ok(run(v_terminal, params, None, -1.0, dense)?.reversed(params.horizon))
}

/// Relative defect of `½‖u(t)‖² + ε∫‖u_x‖² + ∫(F(u),u) − ∫(g,u) = ½‖u₀‖²`,
/// maximised over snapshots. Zero initial data gives the absolute defect.
pub fn energy_residual(traj: &Trajectory) -> Result<f64> {
    let rows = traj.ledger();
    let first = rows.first().ok_or(Error::EmptyTrajectory)?;
    let e0 = 0.5 * first.i2;
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    Ok(rows
        .iter()
        .map(|r| row_residual(r, e0) / scale)
        .fold(0.0, f64::max))
}

/// Absolute energy defect of one ledger row against `e0 = ½‖u₀‖²`.
pub fn row_residual(row: &LedgerRow, e0: f64) -> f64 {
    let lhs = 0.5 * row.i2 + row.eps_dissipation + row.damping_dissipation - row.forcing_work;
    (lhs - e0).abs()
}
