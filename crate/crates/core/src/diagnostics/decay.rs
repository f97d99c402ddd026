use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// `‖u(t)‖ ≈ C e^{−λt} ‖u₀‖` fitted on a time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub lambda: f64,
    pub fit_window: (f64, f64),
    /// RMS of the residuals of the log-linear fit.
    pub residual: f64,
}

impl DecayFit {
    /// Window `(T/4, T)` skipping the initial transient.
    pub fn default_window(horizon: f64) -> (f64, f64) {
        (0.25 * horizon, horizon)
    }
}

/// Least-squares line through `(t, log‖u(t)‖)` for the per-step norms that
/// fall inside `window`.
pub fn fit_decay(traj: &Trajectory, window: (f64, f64)) -> Result<DecayFit> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let horizon = traj.horizon();
    if !(window.0 >= 0.0 && window.1 <= horizon * (1.0 + 1e-12) && window.0 < window.1) {
        return Err(Error::DegenerateFit(format!(
            "window ({}, {}) is not inside [0, {horizon}]",
            window.0, window.1
        )));
    }
    fit_log_linear(traj.step_times(), traj.step_norms(), traj.initial_norm(), window)
}

pub fn fit_log_linear(times: &[f64], norms: &[f64], initial_norm: f64, window: (f64, f64)) -> Result<DecayFit> {
    let slack = 1e-9 * window.1.abs().max(1.0);
    let points: Vec<(f64, f64)> = times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= window.0 - slack && **t <= window.1 + slack)
        .map(|(t, n)| (*t, *n))
        .collect();
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!("only {} samples in the fit window", points.len())));
    }
    if let Some((t, _)) = points.iter().find(|(_, n)| !(*n > 0.0)) {
        return Err(Error::DegenerateFit(format!("norm vanishes at t = {t}")));
    }
    if !(initial_norm > 0.0) {
        return Err(Error::DegenerateFit("initial norm is zero".into()));
    }
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, v) in &points {
        sxx += (t - mt) * (t - mt);
        sxy += (t - mt) * (v.ln() - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mt;
    let residual = (points
        .iter()
        .map(|(t, v)| (v.ln() - intercept - slope * t).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        c: intercept.exp() / initial_norm,
        lambda: -slope,
        fit_window: window,
        residual,
    })
}
