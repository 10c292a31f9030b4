use crate::model::FlowKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A flow references a design column that does not exist.
    #[error("flow {flow}: covariate index {index} out of range for a row of length {len}")]
    Structural {
        flow: FlowKind,
        index: usize,
        len: usize,
    },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("initialization error: {0}")]
    Initialization(String),
    #[error("diagnostic unavailable: {0}")]
    DiagnosticUnavailable(String),
    #[error("tuning failed on fold {fold}: {source}")]
    Tuning {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("scenario {scenario}: every replication failed for method {method}")]
    Scenario { scenario: String, method: String },
}
