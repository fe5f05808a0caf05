use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("undefined phase: fundamental amplitude is zero")]
    UndefinedPhase,

    #[error("degenerate loop: {0}")]
    DegenerateLoop(String),

    #[error("no root in search window [{lo}, {hi}]")]
    SearchWindow { lo: f64, hi: f64 },

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
