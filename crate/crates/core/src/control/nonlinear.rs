use num_complex::Complex64;

use super::gramian::Gramian;
use super::linear::hum_solve;
use super::{relative_error, ControlProblem, ControlSolution};
use crate::dynamics::{evolve, evolve_dense, ForcingRecord};
use crate::error::{Error, Result};
use crate::spectral::{OperatorKernel, SpectralField};

/// Picard iteration for the nonlinear control problem.
///
/// Each sweep freezes the advective term at the previous iterate `v`, solves
/// the linear problem for the residual target `u1 − z(T)` (with `z` the damped
/// linear flow from `u0` forced by `−α v v_x`), and updates
/// `v ← z + W k`. The returned control is verified on the full nonlinear
/// equation.
pub fn solve_nonlinear_control(prob: &ControlProblem) -> Result<ControlSolution> {
    let prob = &prob.prepared(true)?;
    let alpha = prob.params.alpha;
    let linear = prob.params.clone().with_alpha(0.0);
    let gram = Gramian::new(&linear, prob.horizon, prob.s)?;
    let grid = prob.u0.grid();
    let samples = 2 * gram.steps() + 1;
    let mut kernel = OperatorKernel::new(grid);
    let n = grid.modes() + 1;

    let mut v: Vec<SpectralField> = vec![SpectralField::zeros(grid); samples];
    let mut warm: Option<SpectralField> = None;
    let mut increments = Vec::new();
    let mut cg_total = 0;
    let mut last = None;

    for iteration in 1..=prob.settings.max_picard {
        let advective: Vec<SpectralField> = v
            .iter()
            .map(|vj| {
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                kernel.advection(vj.coefficients(), &mut out);
                for c in out.iter_mut() {
                    *c *= -alpha;
                }
                SpectralField::from_raw(grid, out)
            })
            .collect();
        let advective = ForcingRecord::new(advective)?;
        let z_t = gram.terminal_state(&prob.u0, Some(&advective))?;
        let target = gram.lift(&(&prob.u1 - &z_t));
        let cg = hum_solve(&gram, &target, warm.as_ref(), &prob.settings)?;
        cg_total += cg.iterations;
        let control = gram.control(&cg.solution)?;
        let total: Vec<SpectralField> = advective
            .samples()
            .iter()
            .zip(gram.forcing(&control).samples())
            .map(|(a, g)| a + g)
            .collect();
        let total = ForcingRecord::new(total)?;
        let next = evolve_dense(&prob.u0, gram.params(), Some(&total))?;
        let next = next.half_steps.expect("dense forward run");
        let increment = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).sobolev_norm(prob.s))
            .fold(0.0, f64::max);
        increments.push(increment);
        log::debug!("picard iteration {iteration}: increment {increment:.3e}, cg {}", cg.iterations);
        v = next;
        warm = Some(cg.solution.clone());
        last = Some((cg, control));
        if increment < prob.settings.picard_tol {
            break;
        }
        let m = increments.len();
        if m >= 3 && increments[m - 1] > increments[m - 2] && increments[m - 2] > increments[m - 3] {
            return Err(Error::SmallnessViolation { iteration, increments });
        }
        if !increment.is_finite() {
            return Err(Error::SmallnessViolation { iteration, increments });
        }
    }
    let picard_iterations = increments.len();
    if *increments.last().unwrap() >= prob.settings.picard_tol {
        return Err(Error::NonConvergence {
            iterations: picard_iterations,
            residual: *increments.last().unwrap(),
            history: increments,
        });
    }
    let (cg, control) = last.expect("at least one Picard iteration");
    let forcing = gram.forcing(&control);
    let full = prob.params.clone().with_horizon(prob.horizon).with_stride(usize::MAX);
    let reached = evolve(&prob.u0, &full, Some(&forcing))?.final_state().clone();
    Ok(ControlSolution {
        control_energy: gram.control_energy(&control),
        terminal_error: relative_error(&reached, &prob.u1, prob.s),
        terminal_state: reached,
        v_terminal: cg.solution,
        control,
        cg_iterations: cg_total,
        cg_residual: cg.residual,
        cg_history: cg.history,
        picard_iterations,
        picard_increments: increments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::ControlSettings;
    use crate::dynamics::EvolutionParams;
    use crate::spectral::{DampingProfile, Grid};
    use std::f64::consts::PI;

    fn problem(u1: SpectralField, dt: f64) -> ControlProblem {
        let grid = u1.grid().clone();
        let p = EvolutionParams::new(DampingProfile::bump(&grid, PI, PI).unwrap(), 1.0, dt).with_alpha(1.0);
        ControlProblem::new(SpectralField::zeros(&grid), u1, 1.0, 1.0, p)
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let grid = Grid::for_modes(8).unwrap();
        let sol = solve_nonlinear_control(&problem(SpectralField::zeros(&grid), 1e-2)).unwrap();
        assert_eq!(sol.picard_iterations, 1);
        assert!(sol.control.samples().iter().all(|k| k.max_abs_coefficient() == 0.0));
    }

    #[test]
    fn small_target_is_reached_on_the_nonlinear_flow() {
        let grid = Grid::for_modes(16).unwrap();
        let u1 = SpectralField::from_fn(&grid, |x| x.cos() + 0.5 * (2.0 * x).sin());
        let u1 = u1.scaled(1e-3 / u1.sobolev_norm(1.0));
        let sol = solve_nonlinear_control(&problem(u1, 2e-3)).unwrap();
        assert!(sol.picard_iterations <= 10, "{}", sol.picard_iterations);
        assert!(sol.terminal_error <= 1e-6, "{}", sol.terminal_error);
        assert!(sol.picard_increments.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn smallness_threshold_is_enforced() {
        let grid = Grid::for_modes(8).unwrap();
        let prob = problem(SpectralField::cos_mode(&grid, 1, 0.1), 1e-2);
        assert!(matches!(solve_nonlinear_control(&prob), Err(Error::Config { .. })));
        let prob = prob.with_settings(ControlSettings { delta: 1.0, experimental_s: false, ..Default::default() });
        assert!(prob.validate(true).is_ok());
    }
}
