use thiserror::Error;

/// Broad failure classes; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parameter,
    Convergence,
    ImplementationFault,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("sieve limit {limit} exceeds the configured cap {cap}")]
    Resource { limit: u64, cap: u64 },

    #[error("prime table covers up to {limit}, but {requested} was requested")]
    InsufficientTable { limit: u64, requested: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("predicted set size {predicted} (= {description}) exceeds cap {cap}")]
    SizeOverflow {
        predicted: f64,
        description: String,
        cap: u64,
    },

    #[error("degenerate discretization window: T^-1 (log T)^2 = {width} >= 1")]
    DegenerateWindow { width: f64 },

    #[error("too close to the pole of zeta: |1 - s| = {distance:e}")]
    NearPole { distance: f64 },

    #[error("1 - 2^(1-s) vanishes at s = {sigma} + {t}i")]
    RemovableSingularity { sigma: f64, t: f64 },

    #[error("divisor enumeration of an element with {factors} prime factors refused (Rankin bound = {bound:e})")]
    DivisorExplosion { factors: usize, bound: f64 },

    #[error("quadrature did not converge: relative change {delta:e} after {levels} halvings (step {step:e}, {points} points)")]
    Convergence {
        delta: f64,
        levels: usize,
        step: f64,
        points: usize,
    },

    #[error("no witness found: best |zeta| = {best} at t = {t_best}, certificate = {certificate}")]
    WitnessNotFound {
        certificate: f64,
        best: f64,
        t_best: f64,
    },

    #[error("{what} = {value} exceeds desk cap {cap}")]
    DeskCap { what: String, value: f64, cap: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Convergence { .. } => ErrorClass::Convergence,
            Error::WitnessNotFound { .. } => ErrorClass::ImplementationFault,
            Error::Io(_) | Error::Json(_) => ErrorClass::Io,
            _ => ErrorClass::Parameter,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
