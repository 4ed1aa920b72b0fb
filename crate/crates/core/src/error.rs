use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("threshold undefined: chi = {chi} is not positive")]
    ChiNonPositive { chi: f64 },

    #[error("supremum undefined: Gamma_(n,p) = {gamma} is not positive")]
    GammaNonPositive { gamma: f64 },

    #[error("persistence bound not applicable: R0^s = {r0s} is not above 1")]
    BoundNotApplicable { r0s: f64 },

    #[error("noise record does not match companion path: {0}")]
    GridMismatch(String),

    #[error("invalid averaging window [{start}, {end}] on grid [0, {t_end}]")]
    Window { start: f64, end: f64, t_end: f64 },

    #[error("not enough points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{} path(s) failed: {}", failures.len(), format_failures(failures))]
    EnsembleFailed { failures: Vec<PathFailure> },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathFailure {
    pub index: u64,
    pub seed: u64,
    pub step: usize,
}

fn format_failures(failures: &[PathFailure]) -> String {
    failures
        .iter()
        .map(|f| format!("path {} (seed {:#018x}) at step {}", f.index, f.seed, f.step))
        .collect::<Vec<_>>()
        .join(", ")
}
