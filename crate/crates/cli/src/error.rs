use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("optimization failed: {0}")]
    Optimization(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 0 success, 1 usage, 2 data, 3 optimization.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) | CliError::Io { .. } => 2,
            CliError::Optimization(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<rbc::Error> for CliError {
    fn from(e: rbc::Error) -> Self {
        use rbc::Error as E;
        match e {
            E::InvalidData(_) | E::Structural { .. } => CliError::Data(e.to_string()),
            E::Initialization(_) | E::Tuning { .. } | E::Scenario { .. } | E::DiagnosticUnavailable(_) => {
                CliError::Optimization(e.to_string())
            }
            E::InvalidModel(_) | E::Domain(_) | E::Config(_) | E::Argument(_) => CliError::Usage(e.to_string()),
        }
    }
}
