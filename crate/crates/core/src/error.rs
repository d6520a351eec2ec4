use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{op} is not defined for the {model} model")]
    Unsupported { op: &'static str, model: &'static str },

    #[error("non-finite value evaluating {what} at phi = {phi} for {spec}")]
    NonFinite {
        what: &'static str,
        phi: String,
        spec: String,
    },

    #[error("no vacuum found in [{lo}, {hi}]")]
    NoVacuumFound { lo: f64, hi: f64 },

    #[error("degenerate soliton speeds c1 = c2 = {0}")]
    DegenerateSpeeds(f64),

    #[error("logarithm branch point at x = {x}, t = {t}")]
    BranchPoint { x: f64, t: f64 },

    #[error("kink tail does not reach the vacuum: residual {residual:e} at x = {x}")]
    TailNotReached { x: f64, residual: f64 },

    #[error("kink profile is not monotone near x = {0}")]
    NonMonotonic(f64),

    #[error("kink profiles overlap by {0:e}")]
    OverlapTooLarge(f64),

    #[error("time step {dt} violates CFL bound {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("boundary drifted away from the vacuum by {drift:e} at t = {t}")]
    BoundaryDrift { t: f64, drift: f64 },

    #[error("time step {dt} exceeds the dispersive stability bound {limit}")]
    StabilityViolation { dt: f64, limit: f64 },

    #[error("potential singular at phi = {0}")]
    PotentialSingularity(String),

    #[error("edge lies outside the trajectory: {0}")]
    EdgeOutsideTrajectory(String),

    #[error("contour lies outside the trajectory: {0}")]
    ContourOutsideTrajectory(String),

    #[error("contour too large for a Stokes check: {0}")]
    ContourTooLarge(String),

    #[error("degenerate vacuum eigenvalues at lambda = {0}")]
    DegenerateEigenvalues(String),

    #[error("state tail is not at a vacuum: |phi - vacuum| = {0:e}")]
    TailNotVacuum(f64),

    #[error("a(lambda) vanishes at lambda = {0}")]
    ZeroOfA(f64),

    #[error("trajectory contains no collision")]
    NoCollisionFound,

    #[error("reflected point ({x}, {t}) lies outside the trajectory")]
    ReflectionOutsideBox { x: f64, t: f64 },

    #[error("no snapshot at t = {0}")]
    MissingSnapshot(f64),

    #[error("malformed input {file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors raised by runtime guards of the solvers (as opposed to
    /// invalid input).
    pub fn is_runtime_guard(&self) -> bool {
        matches!(
            self,
            Error::CflViolation { .. }
                | Error::BoundaryDrift { .. }
                | Error::StabilityViolation { .. }
                | Error::TailNotReached { .. }
                | Error::NonMonotonic(_)
                | Error::OverlapTooLarge(_)
                | Error::TailNotVacuum(_)
                | Error::NonFinite { .. }
        )
    }
}
