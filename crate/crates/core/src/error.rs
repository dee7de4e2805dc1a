use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Ingestion,
    Config,
    Numerical,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input series")]
    EmptyInput,

    /// `index` is 1-based.
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid scale {scale} for series of length {len}")]
    InvalidScale { scale: usize, len: usize },

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("window of size {window} too small for {params} regression parameters")]
    WindowTooSmall { window: usize, params: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("generation failed: {0}")]
    Generation(String),

    #[error(
        "inadmissible bivariate structure (hurst_x={hurst_x}, hurst_y={hurst_y}, corr={corr}): \
         embedding is not positive semidefinite"
    )]
    Incoherent {
        hurst_x: f64,
        hurst_y: f64,
        corr: f64,
    },

    #[error("cascade depth {depth} exceeds the addressable length")]
    SizeOverflow { depth: u32 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient scales: {found} usable, at least {required} required")]
    InsufficientScales { found: usize, required: usize },

    #[error("invalid experiment spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::EmptyInput
            | Error::NonFinite { .. }
            | Error::MissingColumn(_)
            | Error::Parse { .. }
            | Error::Csv(_) => ErrorCategory::Ingestion,
            Error::InvalidScale { .. }
            | Error::LengthMismatch { .. }
            | Error::InvalidParameter { .. }
            | Error::WindowTooSmall { .. }
            | Error::Config(_)
            | Error::InvalidSpec(_)
            | Error::SizeOverflow { .. }
            | Error::Incoherent { .. }
            | Error::Json(_) => ErrorCategory::Config,
            Error::Generation(_) | Error::Degenerate(_) | Error::InsufficientScales { .. } => {
                ErrorCategory::Numerical
            }
            Error::Io(_) => ErrorCategory::Io,
            Error::Context { source, .. } => source.category(),
        }
    }

    /// Wraps the error with a short description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
