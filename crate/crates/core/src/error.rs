use crate::tail_bounds::SpecViolation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid error spec: {}", join_violations(.0))]
    InvalidSpec(Vec<SpecViolation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("sample {index} = {value} lies outside [0, 1]")]
    SampleOutOfRange { index: usize, value: f64 },

    #[error("sample source exhausted after {drawn} of {needed} draws")]
    SourceExhausted { needed: u64, drawn: u64 },

    #[error("exp(-lambda * Y) overflows at scenario {scenario} (exponent {exponent})")]
    Overflow { scenario: usize, exponent: f64 },

    #[error("model provides no analytic gradient and finite-difference fallback is disabled")]
    MissingGradient,

    #[error("invalid optimization settings: {0}")]
    InvalidSettings(String),

    #[error("objective is not finite at the starting point (lambda = {lambda}, theta = {theta:?})")]
    NonFiniteStart { lambda: f64, theta: Vec<f64> },

    #[error("line search overflowed at every trial step from lambda = {lambda}, theta = {theta:?}")]
    SearchOverflow { lambda: f64, theta: Vec<f64> },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed grid: {0}")]
    InvalidGrid(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

fn join_violations(v: &[SpecViolation]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    parts.join("; ")
}

/// Shape mismatch between a vector argument and the model it is used with.
pub(crate) fn dimension_error(what: &str, expected: usize, got: usize) -> Error {
    Error::Domain(format!("{what} has length {got}, expected {expected}"))
}

impl Error {
    pub fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
