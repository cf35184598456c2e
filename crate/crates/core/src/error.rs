use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("survivors ({survivors}) exceed branching ({branching})")]
    SurvivorsExceedBranching { survivors: u32, branching: u32 },

    #[error("construction depth {depth} too large: {reason}")]
    DepthTooLarge { depth: u32, reason: String },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("frequency cutoff {cutoff} exceeds the Nyquist limit {limit} of the grid")]
    BeyondNyquist { cutoff: usize, limit: usize },

    #[error("mollifier width {eps} is smaller than the cell width {cell}")]
    MollifierTooNarrow { eps: f64, cell: f64 },

    /// The truncation parameter `N = e^{1/(1-alpha)} / C2` does not fit in an `f64`.
    #[error("truncation parameter out of range: ln N = {ln_n}")]
    TruncationOutOfRange { ln_n: f64 },

    #[error("no critical point of the phase in the bracket ({lo}, {hi})")]
    NoCriticalPoint { lo: f64, hi: f64 },

    #[error("degenerate phase: second derivative {second} vanishes at the critical point {t_c}")]
    DegeneratePhase { t_c: f64, second: f64 },

    #[error("derivative inversion failed: {0}")]
    InversionFailed(String),

    #[error("representation mismatch: {0}")]
    RepresentationMismatch(String),

    #[error("multiplier table covers |xi|,|eta| <= {table}, but {needed} is required")]
    TableCoverage { table: usize, needed: usize },

    #[error("negative density value {value} at cell {cell}")]
    NegativeDensity { cell: usize, value: f64 },

    #[error("epsilon sequence must be strictly decreasing and positive")]
    NonMonotoneEpsilon,

    #[error("interval set precondition violated: {0}")]
    IntervalSet(String),

    #[error("resolution exceeded at scale {scale}: {reason}")]
    ResolutionExceeded { scale: u32, reason: String },

    #[error("malformed binary data: {0}")]
    Format(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
