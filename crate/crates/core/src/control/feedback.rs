use crate::dynamics::{evolve, EvolutionParams, FeedbackLaw, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Runs the closed loop `u_t + ℋu_xx + α uu_x = ε u_xx − F(u)` with `F = GDG`
/// or `F = G²`.
pub fn closed_loop_feedback(u0: &SpectralField, law: FeedbackLaw, params: &EvolutionParams) -> Result<Trajectory> {
    if law == FeedbackLaw::Off {
        return Err(Error::Domain("closed loop needs a damping law".into()));
    }
    if !u0.is_zero_mean() {
        return Err(Error::Domain("closed-loop initial state must have zero mean".into()));
    }
    evolve(&u0.clone().without_mean(), &params.clone().with_feedback(law), None)
}
