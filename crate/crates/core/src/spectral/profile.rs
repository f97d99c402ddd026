use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::grid::{Grid, Transform};
use crate::error::{Error, Result};

/// Nonnegative weight `a(x)` with `∫_𝕋 a dx = 1`, defining the damping
/// operator `Gu = a (u − ∫ a u)`.
#[derive(Clone, Debug)]
pub struct DampingProfile {
    grid: Arc<Grid>,
    samples: Vec<f64>,
    spectrum: Vec<Complex64>,
    support: Option<(f64, f64)>,
}

impl DampingProfile {
    /// Smooth bump `c·exp(−1/(1−t²))`, `t = 2(x − center)/width`, normalized by
    /// the trapezoidal rule. Support is the arc `(center − width/2, center + width/2)`.
    pub fn bump(grid: &Arc<Grid>, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width < 2.0 * PI) {
            return Err(Error::config(
                "damping.width",
                format!("bump width must lie in (0, 2π), got {width}"),
            ));
        }
        if !(0.0..2.0 * PI).contains(&center) {
            return Err(Error::config(
                "damping.center",
                format!("bump center must lie in [0, 2π), got {center}"),
            ));
        }
        let samples: Vec<f64> = grid
            .nodes()
            .into_iter()
            .map(|x| {
                let t = 2.0 * wrap(x - center) / width;
                if t.abs() < 1.0 {
                    (-1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let mut profile = Self::from_samples(grid, samples)?;
        profile.support = Some((
            (center - width / 2.0).rem_euclid(2.0 * PI),
            (center + width / 2.0).rem_euclid(2.0 * PI),
        ));
        Ok(profile)
    }

    /// Profile from nonnegative grid samples, rescaled to unit integral.
    pub fn from_samples(grid: &Arc<Grid>, mut samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.points() {
            return Err(Error::LengthMismatch {
                expected: grid.points(),
                got: samples.len(),
            });
        }
        if samples.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::config("damping", "profile samples must be nonnegative"));
        }
        let integral: f64 = samples.iter().sum::<f64>() * grid.spacing();
        if !(integral > 0.0) {
            return Err(Error::config("damping", "profile must have positive integral"));
        }
        samples.iter_mut().for_each(|a| *a /= integral);
        let spectrum = Transform::new(grid).full_spectrum(&samples);
        Ok(DampingProfile {
            grid: Arc::clone(grid),
            samples,
            spectrum,
            support: None,
        })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_samples(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `â_k` for signed `k` with `|k| <= M/2`.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let m = self.grid.points() as i64;
        self.spectrum[k.rem_euclid(m) as usize]
    }

    /// Arc `ω = (x_left, x_right)` outside of which the profile vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    /// Trapezoidal `∫_𝕋 a dx`.
    pub fn integral(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.grid.spacing()
    }

    /// Trapezoidal `∫_𝕋 a u dx` for grid samples of `u`.
    pub(crate) fn weighted_integral(&self, u: &[f64]) -> f64 {
        self.samples.iter().zip(u).map(|(a, u)| a * u).sum::<f64>() * self.grid.spacing()
    }
}

/// Convenience constructor matching the bump recipe.
pub fn make_bump_profile(grid: &Arc<Grid>, center: f64, width: f64) -> Result<DampingProfile> {
    DampingProfile::bump(grid, center, width)
}

/// Signed periodic distance into `(−π, π]`.
fn wrap(d: f64) -> f64 {
    let r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bump_is_normalized_and_nonnegative() {
        let grid = Grid::new(128).unwrap();
        for &(c, w) in &[(PI, PI), (0.3, 1.0), (6.0, 2.5), (1.0, 6.0)] {
            let a = DampingProfile::bump(&grid, c, w).unwrap();
            assert_abs_diff_eq!(a.integral(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(2.0 * PI * a.coefficient(0).re, 1.0, epsilon = 1e-12);
            assert!(a.samples().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn bump_vanishes_outside_support_and_peaks_at_center() {
        let grid = Grid::new(128).unwrap();
        let a = DampingProfile::bump(&grid, PI, PI).unwrap();
        let s = a.samples();
        assert_eq!(s[0], 0.0);
        let max = s.iter().cloned().fold(0.0, f64::max);
        assert_eq!(s[64], max);
        for (x, v) in grid.nodes().iter().zip(s) {
            if (x - PI).abs() >= PI / 2.0 {
                assert!(*v < 1e-14);
            }
        }
    }

    #[test]
    fn bump_wraps_around_zero() {
        let grid = Grid::new(64).unwrap();
        let a = DampingProfile::bump(&grid, 0.0, 1.0).unwrap();
        assert!(a.samples()[0] > 0.0);
        assert_eq!(a.samples()[32], 0.0);
    }

    #[test]
    fn invalid_width_is_rejected() {
        let grid = Grid::new(64).unwrap();
        assert!(DampingProfile::bump(&grid, 1.0, 2.0 * PI).is_err());
        assert!(DampingProfile::bump(&grid, 1.0, 0.0).is_err());
        assert!(DampingProfile::from_fn(&grid, |x| x.cos()).is_err());
    }
}
