//! Error taxonomy shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Point lies outside the chart (the puncture or the boundary sphere).
    #[error("outside chart domain: {0}")]
    Domain(String),
    #[error("invalid diffeomorphism: {0}")]
    InvalidDiffeomorphism(String),
    /// R = J(d/dr) is grossly non-tangent to the level set.
    #[error("not almost cylindrical: {0}")]
    NotAlmostCylindrical(String),
    /// The J-invariant intersection has the wrong dimension.
    #[error("degenerate splitting: {0}")]
    DegenerateSplitting(String),
    /// Limit Reeb field has a radial component beyond tolerance.
    #[error("ACC3 violation: {0}")]
    Acc3Violation(String),
    #[error("flow integration failure: {0}")]
    IntegrationFailure(String),
    #[error("loop not closed: {0}")]
    NotClosed(String),
    /// Slope estimates at different depth pairs disagree.
    #[error("not converged: {0}")]
    NotConverged(String),
    /// A required infimum is nonpositive at the chosen depth.
    #[error("sampling region too shallow: {0}")]
    RegionTooShallow(String),
    /// Density does not decay, so no exponential tail bound exists.
    #[error("no tail bound: {0}")]
    NoTailBound(String),
    #[error("ill-posed domain: {0}")]
    IllPosedDomain(String),
    #[error("cannot evaluate: {0}")]
    CannotEvaluate(String),
    #[error("validation: {0}")]
    Validation(String),
    #[error("{0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
