use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid inverse temperature {0}: must be finite and >= 0")]
    InvalidBeta(f64),

    /// The single-mode energy vanishes, so the Bogoliubov angle is undefined.
    #[error(
        "degenerate mode at k = {momentum} (anisotropy {anisotropy}, field {field}): zero energy"
    )]
    DegenerateMode {
        momentum: f64,
        anisotropy: f64,
        field: f64,
    },

    #[error("momentum {0} outside the open interval (0, pi)")]
    MomentumOutOfRange(f64),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(&'static str),

    #[error("dimension mismatch: chains with {left} and {right} sites")]
    DimensionMismatch { left: usize, right: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("finite-difference step {step} too large for beta = {beta}")]
    StepDomain { beta: f64, step: f64 },

    #[error("non-finite function value {value} at x = {x}")]
    Evaluation { x: f64, value: f64 },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("exact diagonalization limited to {cap} sites, got {n_sites}")]
    Resource { n_sites: usize, cap: usize },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("parity classification failed: {0}")]
    ParityClassification(String),
}
