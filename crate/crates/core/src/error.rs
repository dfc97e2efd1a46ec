use thiserror::Error;

/// Errors raised by every operation in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero measure")]
    ZeroMeasure,
    #[error("window insufficient: need [{need_lo}, {need_hi}], have [{have_lo}, {have_hi}]")]
    WindowInsufficient {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },
    #[error("index arithmetic overflow for window [{lo}, {hi}]")]
    IndexOverflow { lo: i64, hi: i64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("increase n_max: stage {needed} exceeds built depth {built}")]
    IncreaseNMax { needed: usize, built: usize },
    #[error("endpoint singularity at angle {0}")]
    EndpointSingularity(f64),
    #[error("series tail bound {tail:e} above tolerance; need M' >= {required}")]
    SeriesTail { tail: f64, required: usize },
    #[error("aliasing bound {bound:e} above tolerance; use fft_size >= {suggested}")]
    Aliasing { bound: f64, suggested: usize },
    #[error("quadrature error estimate {estimate:e} exceeds tolerance {tol:e}")]
    Quadrature { estimate: f64, tol: f64 },
    #[error("bump not in gap")]
    BumpNotInGap,
    #[error("insufficient replication: {got} seeds, need at least {need}")]
    InsufficientReplication { got: usize, need: usize },
    #[error("increase N: all coefficients below noise floor {floor:e}")]
    BelowNoiseFloor { floor: f64 },
    #[error("eps {eps:e} below resolution {resolution:e}")]
    BelowResolution { eps: f64, resolution: f64 },
    #[error("convolution vanishes on window")]
    ConvolutionVanishes,
    #[error("empty set")]
    EmptySet,
    #[error("degenerate scales: {0}")]
    DegenerateScales(String),
    #[error("extend window: {0}")]
    ExtendWindow(String),
    #[error("cannot fit {needed} windows: {reason}")]
    CannotFit { needed: usize, reason: String },
    #[error("extend window or raise delta_tol (searched l up to {searched})")]
    DilationExhausted { searched: u64 },
    #[error("non-Rajchman input: {0}")]
    NonRajchman(String),
    #[error("certificate `{name}` failed at step {k}: {detail}")]
    Certificate {
        name: &'static str,
        k: usize,
        detail: String,
    },
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error("io: {0}")]
    Io(String),
    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
