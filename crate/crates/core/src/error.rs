use thiserror::Error;

/// Errors raised by the geometric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("points are antipodal (1 + <p,q> = {gap:e})")]
    AntipodalPoints { gap: f64 },
    #[error("point is outside the domain of the translational structure")]
    OutOfDomain,
    #[error("invalid parameter: {0}")]
    Domain(String),
    #[error("not a unit vector (| |v| - 1 | = {0:e})")]
    NotUnit(f64),
    #[error("vector is not tangent (|<v,p>| = {0:e})")]
    NotTangent(f64),
    #[error("non-finite coordinates")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("immersion degenerate at u = {u:?} (smallest singular value {sigma_min:e})")]
    ImmersionDegenerate { u: Vec<f64>, sigma_min: f64 },
    #[error("symmetric eigenvalue solve failed")]
    EigenSolveFailure,
    #[error("frame is not orthonormal (Gram deviation {0:e})")]
    FrameNotOrthonormal(f64),
    #[error("Gauss-Bonnet requires even intrinsic dimension, got n = {0}")]
    OddDimension(usize),
    #[error("target direction is not a regular value (|kappa| = {0:e} at a preimage)")]
    NotRegularValue(f64),
    #[error("Newton refinement did not converge")]
    ConvergenceFailure,
    #[error("Euler characteristic unknown for this surface")]
    UnknownTopology,
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("point lies outside the open hemisphere")]
    OutsideHemisphere,
    #[error("surface is not contained in an open hemisphere")]
    NotInHemisphere,
    #[error("Gauss-Kronecker curvature vanishes (min |det A| = {0:e})")]
    GkVanishes(f64),
    #[error("principal curvatures do not share one sign")]
    MixedCurvatureSigns,
    #[error("no admissible shrink parameter t")]
    NoAdmissibleT,
}

pub type Result<T> = std::result::Result<T, GeometryError>;
