//! Fourier multipliers and the localized damping operators.

use std::sync::Arc;

use num_complex::Complex64;

use super::field::{bessel_weight, SobolevIndex, SpectralField};
use super::grid::{Grid, Transform};
use super::profile::DampingProfile;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `(ℋu)_k = −i sgn(k) û_k`.
pub fn hilbert(u: &SpectralField) -> SpectralField {
    u.apply_multiplier(|k| if k == 0 { ZERO } else { Complex64::new(0.0, -1.0) })
}

/// `∂_x^p u`.
pub fn derivative(u: &SpectralField, order: u32) -> SpectralField {
    u.apply_multiplier(|k| Complex64::new(0.0, k as f64).powu(order))
}

/// `(D^s u)_k = |k|^s û_k`, mode 0 fixed at zero.
///
/// Negative `s` is only defined on zero-mean fields.
pub fn fractional_derivative(u: &SpectralField, s: impl Into<SobolevIndex>) -> Result<SpectralField> {
    let s = s.into().value();
    if !s.is_finite() {
        return Err(Error::Domain(format!("non-finite order {s}")));
    }
    if s < 0.0 && u.mean() != 0.0 {
        return Err(Error::Domain(format!(
            "D^{s} requested on a field with nonzero mean {}",
            u.mean()
        )));
    }
    if s == 0.0 {
        return Ok(u.clone());
    }
    Ok(u.apply_real_multiplier(|k| if k == 0 { 0.0 } else { (k as f64).powf(s) }))
}

/// `(1 − ∂_x²)^{s/2} u`, i.e. `û_k ↦ (1 + k²)^{s/2} û_k`.
pub fn bessel_potential(u: &SpectralField, s: impl Into<SobolevIndex>) -> SpectralField {
    let s = s.into().value();
    u.apply_real_multiplier(|k| bessel_weight(k, s / 2.0))
}

/// `‖u‖_s`.
pub fn sobolev_norm(u: &SpectralField, s: impl Into<SobolevIndex>) -> f64 {
    u.sobolev_norm(s)
}

/// `(Gu)(x) = a(x) (u(x) − ∫_𝕋 a u dy)`; the product is formed on the grid.
pub fn apply_g(u: &SpectralField, a: &DampingProfile) -> Result<SpectralField> {
    u.grid().check_same(a.grid())?;
    let mut kernel = OperatorKernel::new(u.grid());
    let mut out = vec![ZERO; u.modes() + 1];
    kernel.apply_g(a, u.coefficients(), &mut out);
    Ok(SpectralField::from_raw(u.grid(), out))
}

/// `G(D(Gu))`, the stabilizing feedback operator.
pub fn apply_gdg(u: &SpectralField, a: &DampingProfile) -> Result<SpectralField> {
    u.grid().check_same(a.grid())?;
    let mut kernel = OperatorKernel::new(u.grid());
    let mut out = vec![ZERO; u.modes() + 1];
    kernel.apply_gdg(a, u.coefficients(), &mut out);
    Ok(SpectralField::from_raw(u.grid(), out))
}

/// `G(G u)`, the closed loop of the feedback `h = −G* u`.
pub fn apply_gg(u: &SpectralField, a: &DampingProfile) -> Result<SpectralField> {
    u.grid().check_same(a.grid())?;
    let mut kernel = OperatorKernel::new(u.grid());
    let mut out = vec![ZERO; u.modes() + 1];
    kernel.apply_gg(a, u.coefficients(), &mut out);
    Ok(SpectralField::from_raw(u.grid(), out))
}

/// Pointwise product truncated to the retained band. Exact for band-limited
/// inputs because the grid resolves twice the band without aliasing.
pub fn multiply_dealiased(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_grid(v)?;
    let mut kernel = OperatorKernel::new(u.grid());
    let mut out = vec![ZERO; u.modes() + 1];
    kernel.multiply(u.coefficients(), v.coefficients(), &mut out);
    Ok(SpectralField::from_raw(u.grid(), out))
}

/// `u u_x`, dealiased.
pub fn advection(u: &SpectralField) -> SpectralField {
    let mut kernel = OperatorKernel::new(u.grid());
    let mut out = vec![ZERO; u.modes() + 1];
    kernel.advection(u.coefficients(), &mut out);
    SpectralField::from_raw(u.grid(), out)
}

/// Buffers for repeated operator application on raw half-spectra.
pub(crate) struct OperatorKernel {
    transform: Transform,
    phys_a: Vec<f64>,
    phys_b: Vec<f64>,
    spec: Vec<Complex64>,
}

impl OperatorKernel {
    pub(crate) fn new(grid: &Arc<Grid>) -> Self {
        OperatorKernel {
            transform: Transform::new(grid),
            phys_a: vec![0.0; grid.points()],
            phys_b: vec![0.0; grid.points()],
            spec: vec![ZERO; grid.modes() + 1],
        }
    }

    pub(crate) fn apply_g(&mut self, a: &DampingProfile, u: &[Complex64], out: &mut [Complex64]) {
        self.transform.to_physical(u, &mut self.phys_a);
        g_in_place(a, &mut self.phys_a);
        self.transform.to_spectral(&self.phys_a, out);
        out[0] = ZERO;
    }

    pub(crate) fn apply_gdg(&mut self, a: &DampingProfile, u: &[Complex64], out: &mut [Complex64]) {
        self.transform.to_physical(u, &mut self.phys_a);
        g_in_place(a, &mut self.phys_a);
        self.transform.to_spectral(&self.phys_a, &mut self.spec);
        self.spec[0] = ZERO;
        for (k, c) in self.spec.iter_mut().enumerate() {
            *c *= k as f64;
        }
        self.transform.to_physical(&self.spec, &mut self.phys_a);
        g_in_place(a, &mut self.phys_a);
        self.transform.to_spectral(&self.phys_a, out);
        out[0] = ZERO;
    }

    pub(crate) fn apply_gg(&mut self, a: &DampingProfile, u: &[Complex64], out: &mut [Complex64]) {
        self.transform.to_physical(u, &mut self.phys_a);
        g_in_place(a, &mut self.phys_a);
        self.transform.to_spectral(&self.phys_a, &mut self.spec);
        self.spec[0] = ZERO;
        self.transform.to_physical(&self.spec, &mut self.phys_a);
        g_in_place(a, &mut self.phys_a);
        self.transform.to_spectral(&self.phys_a, out);
        out[0] = ZERO;
    }

    /// `G D^{1/2} k`, the forcing generated by a control `k`.
    pub(crate) fn apply_g_sqrt_d(&mut self, a: &DampingProfile, k: &[Complex64], out: &mut [Complex64]) {
        for (m, (s, c)) in self.spec.iter_mut().zip(k).enumerate() {
            *s = c * (m as f64).sqrt();
        }
        self.transform.to_physical(&self.spec, &mut self.phys_a);
        g_in_place(a, &mut self.phys_a);
        self.transform.to_spectral(&self.phys_a, out);
        out[0] = ZERO;
    }

    /// `D^{1/2} G v`, the observed quantity of the adjoint state.
    pub(crate) fn apply_sqrt_d_g(&mut self, a: &DampingProfile, v: &[Complex64], out: &mut [Complex64]) {
        self.apply_g(a, v, out);
        for (m, c) in out.iter_mut().enumerate() {
            *c *= (m as f64).sqrt();
        }
    }

    pub(crate) fn multiply(&mut self, u: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
        self.transform
            .to_physical_pair(u, v, &mut self.phys_a, &mut self.phys_b);
        for (x, y) in self.phys_a.iter_mut().zip(&self.phys_b) {
            *x *= y;
        }
        self.transform.to_spectral(&self.phys_a, out);
    }

    /// `P_K(u u_x)`.
    pub(crate) fn advection(&mut self, u: &[Complex64], out: &mut [Complex64]) {
        for (k, (s, c)) in self.spec.iter_mut().zip(u).enumerate() {
            *s = c * Complex64::new(0.0, k as f64);
        }
        self.transform
            .to_physical_pair(u, &self.spec, &mut self.phys_a, &mut self.phys_b);
        for (x, y) in self.phys_a.iter_mut().zip(&self.phys_b) {
            *x *= y;
        }
        self.transform.to_spectral(&self.phys_a, out);
        out[0] = ZERO;
    }
}

/// Grid-sample form of `G`: `u_j ← a_j (u_j − ∫ a u)`.
fn g_in_place(a: &DampingProfile, u: &mut [f64]) {
    let mean = a.weighted_integral(u);
    for (x, w) in u.iter_mut().zip(a.samples()) {
        *x = w * (*x - mean);
    }
}
