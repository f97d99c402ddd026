//! Discrete Fourier representation of zero-mean periodic functions and the
//! operator calculus built on it.

mod commutator;
mod field;
mod grid;
mod ops;
mod profile;

pub use commutator::{commutator_projector, FourierSeries, ProjectorSpec, MAX_DERIVATIVE_ORDER};
pub use field::{SobolevIndex, SpectralField, MEAN_TOLERANCE, SYMMETRY_TOLERANCE};
pub use grid::Grid;
pub use ops::{
    advection, apply_g, apply_gdg, apply_gg, bessel_potential, derivative, fractional_derivative, hilbert,
    multiply_dealiased, sobolev_norm,
};
pub use profile::{make_bump_profile, DampingProfile};

pub(crate) use field::{bessel_weight, half_spectrum_dot};
pub(crate) use ops::OperatorKernel;
