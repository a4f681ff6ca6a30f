use thiserror::Error;

/// Errors raised when building or reading initial densities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("breaks must be strictly increasing (breaks[{index}] = {value})")]
    NonMonotoneBreaks { index: usize, value: f64 },
    #[error("expected {expected} values for {breaks} breaks, got {got}")]
    LengthMismatch {
        breaks: usize,
        expected: usize,
        got: usize,
    },
    #[error("density value {value} on interval {index} is negative or not finite")]
    InvalidValue { index: usize, value: f64 },
    #[error("support must lie in [0, inf), got breaks[0] = {0}")]
    NegativeSupport(f64),
    #[error("total mass is zero")]
    ZeroMass,
    #[error("parameter out of range: {0}")]
    Parameter(String),
}

/// Errors raised by the jump resolvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum JumpError {
    #[error("CDF decreased during scan at x = {x} ({before} -> {after})")]
    NonMonotoneCdf { x: f64, before: f64, after: f64 },
    #[error("alive positions are not sorted at index {0}")]
    Unsorted(usize),
    #[error("alive position {position} lies at or below the frontier {frontier}")]
    BelowFrontier { position: f64, frontier: f64 },
    #[error("invalid scan specification: {0}")]
    Scan(String),
}

/// Errors raised by the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid solver parameter: {0}")]
    Parameter(String),
    #[error("frontier {frontier} left the computational domain [0, {x_max}]")]
    FrontierEscaped { frontier: f64, x_max: f64 },
    #[error("domain truncation: mass {mass:e} within dx of x_max at t = {t}")]
    Truncation { mass: f64, t: f64 },
    #[error(transparent)]
    Jump(#[from] JumpError),
}

/// Errors raised by the post-processing passes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("empty input: {0}")]
    Empty(String),
    #[error("invalid window: {0}")]
    Window(String),
    #[error("point x = {0} lies in the closure of a jump interval")]
    InsideJump(f64),
    #[error("no usable blow-up radius at or above {0}")]
    NoRadius(f64),
}

/// Errors raised by the scenario harness.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("artifact {path}: {reason}")]
    Artifact { path: String, reason: String },
    #[error("runs are not comparable: {0}")]
    Mismatch(String),
}

impl HarnessError {
    /// Process exit code: 2 for configuration and input problems, 3 for
    /// numerical aborts.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Sim(SimError::Parameter(_)) => 2,
            HarnessError::Sim(_) => 3,
            _ => 2,
        }
    }
}
