use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed trace at line {line}: {msg}")]
    MalformedTrace { line: u64, msg: String },

    #[error("unknown app `{0}`")]
    UnknownApp(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training diverged (non-finite loss); try a smaller learning rate")]
    Diverged,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed model file: {0}")]
    Model(String),
}

impl Error {
    /// Process exit code for this error class: 2 for data problems,
    /// 3 for training divergence. Usage errors (code 1) are handled by
    /// argument parsing before any `Error` exists.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged => 3,
            _ => 2,
        }
    }
}
