use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::{bessel_weight, Grid, SobolevIndex, SpectralField};

/// Seeded zero-mean field with coefficient variance `∝ (1+k²)^{−s−1}`,
/// rescaled to `‖u‖_s = target_norm`.
pub fn random_initial(grid: &Arc<Grid>, seed: u64, target_norm: f64, s: impl Into<SobolevIndex>) -> Result<SpectralField> {
    if !(target_norm > 0.0 && target_norm.is_finite()) {
        return Err(Error::config("initial.target_norm", format!("must be positive, got {target_norm}")));
    }
    let s = s.into();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.modes() + 1];
    for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
        let sd = bessel_weight(k, -(s.value() + 1.0) / 2.0);
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *c = Complex64::new(re, im) * sd;
    }
    let u = SpectralField::from_coefficients(grid, coeffs)?;
    let norm = u.sobolev_norm(s);
    Ok(u.scaled(target_norm / norm))
}
