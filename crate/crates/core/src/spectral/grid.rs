use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform collocation grid `x_j = 2πj/M` on the torus together with the
/// retained band `|k| <= K`.
///
/// `K` never exceeds `(M - 1) / 3`, so products of two band-limited fields are
/// computed without aliasing into the retained band.
pub struct Grid {
    points: usize,
    modes: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    /// Grid with `points = 2^m` nodes and the full 2/3-rule band `K = ⌊M/3⌋`.
    pub fn new(points: usize) -> Result<Arc<Grid>> {
        Self::with_modes(points, points / 3)
    }

    /// Grid with an explicit truncation `modes <= (points - 1) / 3`.
    pub fn with_modes(points: usize, modes: usize) -> Result<Arc<Grid>> {
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::config(
                "grid.M",
                format!("grid size must be a power of two >= 4, got {points}"),
            ));
        }
        if modes == 0 || 3 * modes + 1 > points {
            return Err(Error::config(
                "grid.K",
                format!("truncation {modes} incompatible with {points} points (need 1 <= K <= (M-1)/3)"),
            ));
        }
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Grid {
            points,
            modes,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        }))
    }

    /// Smallest power-of-two grid that resolves `modes` without aliasing.
    pub fn for_modes(modes: usize) -> Result<Arc<Grid>> {
        let points = (3 * modes + 1).next_power_of_two().max(4);
        Self::with_modes(points, modes)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Truncation `K`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.points as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|j| j as f64 * h).collect()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self.points == other.points && self.modes == other.modes
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_points: self.points,
                left_modes: self.modes,
                right_points: other.points,
                right_modes: other.modes,
            })
        }
    }

    pub(crate) fn forward(&self) -> &dyn Fft<f64> {
        self.forward.as_ref()
    }

    pub(crate) fn inverse(&self) -> &dyn Fft<f64> {
        self.inverse.as_ref()
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("points", &self.points)
            .field("modes", &self.modes)
            .finish()
    }
}

/// Reusable transform buffers for one grid.
pub(crate) struct Transform {
    grid: Arc<Grid>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Transform {
    pub(crate) fn new(grid: &Arc<Grid>) -> Self {
        Transform {
            grid: Arc::clone(grid),
            buf: vec![Complex64::new(0.0, 0.0); grid.points()],
            scratch: vec![Complex64::new(0.0, 0.0); grid.scratch_len()],
        }
    }

    /// Half-spectrum `k = 0..=K` to grid samples. Returns the largest
    /// imaginary residue seen before it is discarded.
    pub(crate) fn to_physical(&mut self, coeffs: &[Complex64], out: &mut [f64]) -> f64 {
        let m = self.grid.points;
        let k_max = self.grid.modes;
        debug_assert_eq!(coeffs.len(), k_max + 1);
        debug_assert_eq!(out.len(), m);
        self.buf.fill(Complex64::new(0.0, 0.0));
        self.buf[0] = coeffs[0];
        for k in 1..=k_max {
            self.buf[k] = coeffs[k];
            self.buf[m - k] = coeffs[k].conj();
        }
        self.grid
            .inverse()
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let mut residue = 0.0_f64;
        for (o, z) in out.iter_mut().zip(&self.buf) {
            *o = z.re;
            residue = residue.max(z.im.abs());
        }
        residue
    }

    /// Two real fields through one complex transform: returns samples of
    /// `first` in `out_a` and `second` in `out_b`.
    pub(crate) fn to_physical_pair(
        &mut self,
        first: &[Complex64],
        second: &[Complex64],
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) {
        let m = self.grid.points;
        let k_max = self.grid.modes;
        let i = Complex64::new(0.0, 1.0);
        self.buf.fill(Complex64::new(0.0, 0.0));
        self.buf[0] = first[0] + i * second[0];
        for k in 1..=k_max {
            self.buf[k] = first[k] + i * second[k];
            self.buf[m - k] = first[k].conj() + i * second[k].conj();
        }
        self.grid
            .inverse()
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        for ((a, b), z) in out_a.iter_mut().zip(out_b.iter_mut()).zip(&self.buf) {
            *a = z.re;
            *b = z.im;
        }
    }

    /// Grid samples to the retained half-spectrum, `û_k = (1/M) Σ u_j e^{-ikx_j}`.
    pub(crate) fn to_spectral(&mut self, samples: &[f64], out: &mut [Complex64]) {
        let m = self.grid.points;
        debug_assert_eq!(samples.len(), m);
        for (z, &s) in self.buf.iter_mut().zip(samples) {
            *z = Complex64::new(s, 0.0);
        }
        self.grid
            .forward()
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / m as f64;
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.buf[k] * scale;
        }
        out[0].im = 0.0;
    }

    /// Full grid spectrum (all `M` bins, FFT order), normalized by `1/M`.
    pub(crate) fn full_spectrum(&mut self, samples: &[f64]) -> Vec<Complex64> {
        for (z, &s) in self.buf.iter_mut().zip(samples) {
            *z = Complex64::new(s, 0.0);
        }
        self.grid
            .forward()
            .process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.grid.points as f64;
        self.buf.iter().map(|z| z * scale).collect()
    }
}
