use thiserror::Error;

/// Errors produced anywhere in the sensing pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("value {value} outside [{min}, {max}]")]
    Range { value: f64, min: f64, max: f64 },

    #[error("model error: {0}")]
    Model(String),

    #[error("simulation error at t = {time:.6} s: {reason}")]
    Simulation { time: f64, reason: String },

    #[error("no usable channels")]
    NoUsableChannels,

    #[error("phase jump {jump_deg:.4} deg outside calibration domain [{lo:.4}, {hi:.4}] deg")]
    Extrapolation { jump_deg: f64, lo: f64, hi: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("step detector found {found} steps, expected {expected}")]
    StepCount { found: usize, expected: usize },

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error("import error on line {line}: {reason}")]
    Import { line: usize, reason: String },

    #[error("{0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the command-line tool.
    ///
    /// 2 usage/config, 3 data/import, 4 estimation failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) | Error::Config { .. } => 2,
            Error::Import { .. } | Error::Format(_) | Error::Io(_) | Error::Range { .. } => 3,
            Error::Simulation { .. } | Error::Model(_) => 3,
            Error::NoUsableChannels
            | Error::Extrapolation { .. }
            | Error::Fit(_)
            | Error::Calibration(_)
            | Error::StepCount { .. } => 4,
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
        Error::Import { line, reason: e.to_string() }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
