use super::cg::{conjugate_gradient, CgOutcome};
use super::gramian::Gramian;
use super::{relative_error, simpson_half_steps, ControlProblem, ControlSettings, ControlSolution};
use crate::dynamics::{evolve, evolve_adjoint_dense};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// CG on `Γ₋ₛ v = target` in the `(·,·)₋ₛ` inner product.
pub(crate) fn hum_solve(
    gram: &Gramian,
    target: &SpectralField,
    warm: Option<&SpectralField>,
    settings: &ControlSettings,
) -> Result<CgOutcome> {
    conjugate_gradient(
        |v| gram.apply(v),
        |f, g| gram.inner(f, g),
        target,
        warm,
        settings.cg_tol,
        settings.max_iter,
    )
}

/// HUM control steering the damped linear flow from `u0` to `u1`.
pub fn solve_linear_control(prob: &ControlProblem) -> Result<ControlSolution> {
    let prob = &prob.prepared(false)?;
    if prob.params.alpha != 0.0 {
        return Err(Error::config("physics.alpha", "linear control needs alpha = 0"));
    }
    let gram = Gramian::new(&prob.params, prob.horizon, prob.s)?;
    let free = gram.terminal_state(&prob.u0, None)?;
    let target = gram.lift(&(&prob.u1 - &free));
    let cg = hum_solve(&gram, &target, None, &prob.settings)?;
    let control = gram.control(&cg.solution)?;
    let forcing = gram.forcing(&control);
    let reached = evolve(&prob.u0, gram.params(), Some(&forcing))?.final_state().clone();
    Ok(ControlSolution {
        control_energy: gram.control_energy(&control),
        terminal_error: relative_error(&reached, &prob.u1, prob.s),
        terminal_state: reached,
        v_terminal: cg.solution,
        control,
        cg_iterations: cg.iterations,
        cg_residual: cg.residual,
        cg_history: cg.history,
        picard_iterations: 0,
        picard_increments: Vec::new(),
    })
}

/// Relative defect of `(u(T), vT) − (u0, v(0)) = ∫₀ᵀ (G D^{1/2} k, v) dt` along
/// a linear control solution, with `u` and `v` re-integrated from scratch.
pub fn duality_defect(prob: &ControlProblem, sol: &ControlSolution) -> Result<f64> {
    let gram = Gramian::new(&prob.params, prob.horizon, prob.s)?;
    let forcing = gram.forcing(&sol.control);
    let u_t = evolve(&prob.u0, gram.params(), Some(&forcing))?.final_state().clone();
    let adj = evolve_adjoint_dense(&sol.v_terminal, gram.params())?;
    let v = adj.half_steps().expect("dense adjoint run");
    let lhs = u_t.inner(&sol.v_terminal) - prob.u0.inner(adj.first_state());
    let work: Vec<f64> = forcing.samples().iter().zip(v).map(|(g, v)| g.inner(v)).collect();
    let rhs = simpson_half_steps(&work, prob.horizon);
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-300))
}
