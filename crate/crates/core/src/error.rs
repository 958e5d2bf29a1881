use thiserror::Error;

use crate::branch::MassCurve;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid nonlinearity: {0}")]
    InvalidSpec(String),

    /// Positive solutions only exist for a strictly positive frequency.
    #[error("no positive solutions exist for lambda <= 0 (got lambda = {0})")]
    NonPositiveFrequency(f64),

    #[error("target mass must be positive (got a = {0})")]
    NonPositiveMass(f64),

    #[error("outside the admissible growth range: {0}")]
    OutOfScope(String),

    #[error("series launch step h = {h:e} too large (limit {limit:e})")]
    StepTooLarge { h: f64, limit: f64 },

    #[error("step size underflow at r = {r:e} (u = {u:e}, u' = {du:e})")]
    Stiffness { r: f64, u: f64, du: f64 },

    #[error("no positive root of F(s) = -lambda s^2/2 + G(s) in the scan range")]
    AmplitudeRootNotFound,

    #[error("shoot failed: {0}")]
    ShootFailed(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("profile has no exponential tail attached")]
    MissingTail,

    #[error("sweep degenerate: {failed} of {total} grid points failed")]
    SweepDegenerate {
        failed: usize,
        total: usize,
        partial: Box<MassCurve>,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by bad user input rather than by the numerics.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::InvalidSpec(_)
                | Error::NonPositiveFrequency(_)
                | Error::NonPositiveMass(_)
                | Error::OutOfScope(_)
                | Error::Usage(_)
        )
    }
}
