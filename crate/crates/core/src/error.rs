use thiserror::Error;

/// Errors raised by the state, dynamics, measurement and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty mode list")]
    EmptyModes,
    #[error("duplicate mode id `{0}`")]
    DuplicateMode(String),
    #[error("unknown mode id `{0}`")]
    UnknownMode(String),
    #[error("mode `{id}` is {found}, expected {expected}")]
    WrongModeKind {
        id: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("covariance matrix is not symmetric (max deviation {0:e})")]
    NotSymmetric(f64),
    #[error("unphysical state: min eigenvalue of γ + iJ is {0:e}")]
    Unphysical(f64),
    #[error("{0} must be finite")]
    NonFinite(&'static str),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("covariance matrix is singular (det = {0:e})")]
    Degenerate(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular and cannot be inverted")]
    Singular,
    #[error("sample `{0}` appears twice in one transit")]
    DuplicateSample(String),
    #[error("transit mixes beams `{0}` and `{1}`")]
    MixedBeams(String, String),
    #[error("ill-conditioned measurement: measured variance {variance:e} vanishes but correlations do not")]
    IllConditioned { variance: f64 },
    #[error("invalid bipartition: {0}")]
    Partition(String),
    #[error("invalid variance criterion: {0}")]
    Criterion(String),
    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
    #[error("invalid sweep range: {0}")]
    Range(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
