//! Benjamin–Ono equation on the torus with localized damping.
//!
//! The crate covers spectral operator calculus ([`spectral`]), time
//! integration of the damped/viscous equation family and its adjoint
//! ([`dynamics`]), HUM-style exact control ([`control`]), trajectory
//! post-processing ([`diagnostics`]) and the scenario runner used by the CLI
//! ([`harness`]).

pub mod error;
pub mod spectral;
pub mod dynamics;
pub mod control;
pub mod diagnostics;
pub mod harness;

pub use error::{Error, Result};
pub use spectral::{DampingProfile, Grid, SobolevIndex, SpectralField};
