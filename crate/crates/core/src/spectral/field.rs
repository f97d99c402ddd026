use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::{Grid, Transform};
use crate::error::{Error, Result};

/// Imaginary residue above which an inverse transform is rejected.
/// Mean coefficient treated as zero by [`SpectralField::is_zero_mean`].
pub const MEAN_TOLERANCE: f64 = 1e-12;

pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Regularity exponent `s` of the Sobolev scale `H^s(𝕋)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct SobolevIndex(pub f64);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for SobolevIndex {
    fn from(s: f64) -> Self {
        SobolevIndex(s)
    }
}

/// Real-valued periodic function represented by its Fourier coefficients
/// `û_k`, `k = 0..=K`. Negative modes follow from `û_{-k} = conj(û_k)`, so
/// Hermitian symmetry holds by construction.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.modes() + 1],
        }
    }

    /// Builds a field from the nonnegative half-spectrum `[û_0, û_1, …, û_K]`.
    pub fn from_coefficients(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.modes() + 1 {
            return Err(Error::LengthMismatch {
                expected: grid.modes() + 1,
                got: coeffs.len(),
            });
        }
        if coeffs[0].im != 0.0 {
            return Err(Error::Domain(format!(
                "mode 0 of a real field must be real, got {}",
                coeffs[0]
            )));
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    pub(crate) fn from_raw(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.modes() + 1);
        SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        }
    }

    /// `amplitude · cos(kx)`.
    pub fn cos_mode(grid: &Arc<Grid>, k: usize, amplitude: f64) -> Self {
        Self::trig_mode(grid, k, amplitude, 0.0)
    }

    /// `amplitude · sin(kx)`.
    pub fn sin_mode(grid: &Arc<Grid>, k: usize, amplitude: f64) -> Self {
        Self::trig_mode(grid, k, 0.0, amplitude)
    }

    /// `c·cos(kx) + s·sin(kx)`; modes beyond the truncation are dropped.
    pub fn trig_mode(grid: &Arc<Grid>, k: usize, cos: f64, sin: f64) -> Self {
        let mut field = Self::zeros(grid);
        if k == 0 {
            field.coeffs[0] = Complex64::new(cos, 0.0);
        } else if k <= grid.modes() {
            field.coeffs[k] = Complex64::new(cos / 2.0, -sin / 2.0);
        }
        field
    }

    /// Forward transform of real grid samples (`to_spectral`).
    pub fn from_samples(grid: &Arc<Grid>, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.points() {
            return Err(Error::LengthMismatch {
                expected: grid.points(),
                got: samples.len(),
            });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.modes() + 1];
        Transform::new(grid).to_spectral(samples, &mut coeffs);
        Ok(SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Samples `f` on the grid nodes and transforms.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let samples: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        Self::from_samples(grid, &samples).expect("sample count matches grid")
    }

    /// Inverse transform to grid samples (`to_physical`).
    pub fn to_physical(&self) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.grid.points()];
        let residue = Transform::new(&self.grid).to_physical(&self.coeffs, &mut out);
        if !(residue <= SYMMETRY_TOLERANCE) {
            return Err(Error::SymmetryViolation { residue });
        }
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.grid.modes()
    }

    /// Half-spectrum `[û_0, …, û_K]`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[cfg(test)]
    pub(crate) fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// `û_k` for any signed `k`; zero outside the retained band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        if idx > self.grid.modes() {
            return Complex64::new(0.0, 0.0);
        }
        if k < 0 {
            self.coeffs[idx].conj()
        } else {
            self.coeffs[idx]
        }
    }

    /// Mean coefficient `û_0`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Whether `|û_0|` is at roundoff level relative to the largest coefficient.
    pub fn is_zero_mean(&self) -> bool {
        self.coeffs[0].re.abs() <= MEAN_TOLERANCE * self.max_abs_coefficient().max(1.0)
    }

    /// Returns the field with `û_0` set to zero.
    pub fn without_mean(mut self) -> Self {
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        self
    }

    /// Coefficient-wise Fourier multiplier; `symbol(k)` is evaluated for
    /// `k = 0..=K` and must satisfy `symbol(-k) = conj(symbol(k))`.
    pub fn apply_multiplier(&self, symbol: impl Fn(usize) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * symbol(k))
            .collect();
        SpectralField::from_raw(&self.grid, coeffs)
    }

    /// Real even multiplier `m(|k|)`.
    pub fn apply_real_multiplier(&self, symbol: impl Fn(usize) -> f64) -> Self {
        self.apply_multiplier(|k| Complex64::new(symbol(k), 0.0))
    }

    /// `(u, v) = ∫_𝕋 u v dx = 2π Σ_k û_k conj(v̂_k)`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        2.0 * PI * half_spectrum_dot(&self.coeffs, &other.coeffs, |_| 1.0)
    }

    /// `(u, v)_s` with Bessel weights `(1 + k²)^s`.
    pub fn inner_s(&self, other: &SpectralField, s: impl Into<SobolevIndex>) -> f64 {
        let s = s.into().0;
        2.0 * PI * half_spectrum_dot(&self.coeffs, &other.coeffs, |k| bessel_weight(k, s))
    }

    /// `‖u‖ = ‖u‖_{L²(𝕋)}`.
    pub fn norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// `‖u‖_s = (2π Σ_k (1+k²)^s |û_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: impl Into<SobolevIndex>) -> f64 {
        self.inner_s(self, s).max(0.0).sqrt()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `self + factor · other`.
    pub fn axpy(&self, factor: f64, other: &SpectralField) -> SpectralField {
        debug_assert!(self.grid.same_as(&other.grid));
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * factor)
            .collect();
        SpectralField::from_raw(&self.grid, coeffs)
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        SpectralField::from_raw(&self.grid, coeffs)
    }

    pub(crate) fn check_grid(&self, other: &SpectralField) -> Result<()> {
        self.grid.check_same(&other.grid)
    }
}

pub(crate) fn bessel_weight(k: usize, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        (1.0 + (k * k) as f64).powf(s)
    }
}

/// `Σ_{k∈ℤ} w(|k|) a_k conj(b_k)` for Hermitian half-spectra.
pub(crate) fn half_spectrum_dot(a: &[Complex64], b: &[Complex64], weight: impl Fn(usize) -> f64) -> f64 {
    let mut acc = weight(0) * (a[0] * b[0].conj()).re;
    for k in 1..a.len() {
        acc += 2.0 * weight(k) * (a[k] * b[k].conj()).re;
    }
    acc
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;

    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cos_samples_give_half_amplitudes() {
        let grid = Grid::new(16).unwrap();
        let u = SpectralField::from_fn(&grid, f64::cos);
        for k in -5..=5_i64 {
            let expected = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(u.coeff(k).re, expected, epsilon = 1e-15);
            assert_abs_diff_eq!(u.coeff(k).im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_samples_give_zero_field() {
        let grid = Grid::new(16).unwrap();
        let u = SpectralField::from_samples(&grid, &vec![0.0; 16]).unwrap();
        assert!(u.coefficients().iter().all(|c| *c == Complex64::new(0.0, 0.0)));
        assert!(u.to_physical().unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn half_amplitudes_give_cos_samples() {
        let grid = Grid::new(16).unwrap();
        let u = SpectralField::cos_mode(&grid, 1, 1.0);
        let samples = u.to_physical().unwrap();
        for (x, s) in grid.nodes().iter().zip(&samples) {
            assert_abs_diff_eq!(*s, x.cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let grid = Grid::new(16).unwrap();
        assert!(matches!(
            SpectralField::from_samples(&grid, &[1.0; 15]),
            Err(Error::LengthMismatch { expected: 16, got: 15 })
        ));
    }

    #[test]
    fn complex_mean_is_a_symmetry_violation() {
        let grid = Grid::new(16).unwrap();
        let mut u = SpectralField::zeros(&grid);
        u.coefficients_mut()[0] = Complex64::new(0.0, 1e-3);
        assert!(matches!(u.to_physical(), Err(Error::SymmetryViolation { .. })));
        assert!(SpectralField::from_coefficients(&grid, u.into_coefficients()).is_err());
    }

    #[test]
    fn nyquist_and_out_of_band_modes_are_dropped() {
        let grid = Grid::new(16).unwrap();
        let u = SpectralField::from_fn(&grid, |x| (8.0 * x).cos() + (7.0 * x).sin());
        assert!(u.max_abs_coefficient() < 1e-14);
    }

    #[test]
    fn sobolev_norms_of_cosine() {
        let grid = Grid::new(64).unwrap();
        let u = SpectralField::cos_mode(&grid, 1, 1.0);
        assert_abs_diff_eq!(u.norm(), PI.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(u.sobolev_norm(1.0), (2.0 * PI).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn grid_for_modes_avoids_aliasing() {
        assert_eq!(Grid::for_modes(8).unwrap().points(), 32);
        assert_eq!(Grid::for_modes(42).unwrap().points(), 128);
        assert_eq!(Grid::new(128).unwrap().modes(), 42);
        assert!(Grid::with_modes(32, 11).is_err());
        assert!(Grid::new(48).is_err());
    }
}
