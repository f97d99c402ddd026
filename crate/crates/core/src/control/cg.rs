use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Window over which the residual must shrink by at least [`STAGNATION_FACTOR`].
pub const STAGNATION_WINDOW: usize = 50;
/// Minimal relative residual reduction expected per window.
pub const STAGNATION_FACTOR: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: SpectralField,
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖ / ‖b‖` in the solver inner product.
    pub residual: f64,
    /// Relative residual after each iteration, starting with the initial guess.
    pub history: Vec<f64>,
}

/// Conjugate gradients for a self-adjoint positive operator in the inner
/// product `inner`. Fails on stagnation, loss of positivity, or when
/// `max_iter` is exhausted.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&SpectralField) -> Result<SpectralField>,
    inner: impl Fn(&SpectralField, &SpectralField) -> f64,
    rhs: &SpectralField,
    initial: Option<&SpectralField>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let b_norm = inner(rhs, rhs).max(0.0).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            solution: SpectralField::zeros(rhs.grid()),
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }
    let (mut x, mut r) = match initial {
        Some(x0) if x0.max_abs_coefficient() > 0.0 => {
            let ax = apply(x0)?;
            (x0.clone(), rhs - &ax)
        }
        _ => (SpectralField::zeros(rhs.grid()), rhs.clone()),
    };
    let mut rr = inner(&r, &r);
    let mut history = vec![rr.max(0.0).sqrt() / b_norm];
    let mut p = r.clone();
    let mut iterations = 0;
    while *history.last().unwrap() > tol {
        if iterations >= max_iter {
            return Err(non_convergence(iterations, history));
        }
        let ap = apply(&p)?;
        let curvature = inner(&p, &ap);
        if !(curvature > 0.0) {
            log::warn!("conjugate gradient lost positivity at iteration {iterations}");
            return Err(non_convergence(iterations, history));
        }
        let step = rr / curvature;
        x = x.axpy(step, &p);
        r = r.axpy(-step, &ap);
        let rr_new = inner(&r, &r);
        iterations += 1;
        history.push(rr_new.max(0.0).sqrt() / b_norm);
        if history.len() > STAGNATION_WINDOW {
            let now = history[history.len() - 1];
            let before = history[history.len() - 1 - STAGNATION_WINDOW];
            if before - now < STAGNATION_FACTOR * before {
                return Err(non_convergence(iterations, history));
            }
        }
        p = r.axpy(rr_new / rr, &p);
        rr = rr_new;
    }
    Ok(CgOutcome {
        solution: x,
        iterations,
        residual: *history.last().unwrap(),
        history,
    })
}

fn non_convergence(iterations: usize, history: Vec<f64>) -> Error {
    Error::NonConvergence {
        iterations,
        residual: *history.last().unwrap(),
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    #[test]
    fn solves_diagonal_system_in_weighted_product() {
        let grid = Grid::new(32).unwrap();
        let b = SpectralField::from_fn(&grid, |x| x.sin() + 0.3 * (5.0 * x).cos());
        let op = |v: &SpectralField| Ok(v.apply_real_multiplier(|k| 1.0 + k as f64));
        let inner = |f: &SpectralField, g: &SpectralField| f.inner_s(g, -1.0);
        let out = conjugate_gradient(op, inner, &b, None, 1e-12, 50).unwrap();
        let expect = b.apply_real_multiplier(|k| 1.0 / (1.0 + k as f64));
        assert!((&out.solution - &expect).norm() < 1e-12);
        assert!(out.iterations <= 3);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let grid = Grid::new(32).unwrap();
        let zero = SpectralField::zeros(&grid);
        let out = conjugate_gradient(|v| Ok(v.clone()), |f, g| f.inner(g), &zero, None, 1e-8, 5).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.solution.max_abs_coefficient(), 0.0);
    }

    #[test]
    fn indefinite_operator_is_reported() {
        let grid = Grid::new(32).unwrap();
        let b = SpectralField::sin_mode(&grid, 1, 1.0);
        let err = conjugate_gradient(|v| Ok(v.scaled(-1.0)), |f, g| f.inner(g), &b, None, 1e-8, 5).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 0, .. }));
    }

    #[test]
    fn iteration_cap_carries_history() {
        let grid = Grid::new(64).unwrap();
        let b = SpectralField::from_fn(&grid, |x| (1..20).map(|k| (k as f64 * x).sin()).sum());
        let op = |v: &SpectralField| Ok(v.apply_real_multiplier(|k| (k * k) as f64));
        match conjugate_gradient(op, |f, g| f.inner(g), &b, None, 1e-14, 3) {
            Err(Error::NonConvergence { iterations, history, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(history.len(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
