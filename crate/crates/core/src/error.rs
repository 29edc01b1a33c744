use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_cells}x{expected_labels}, found {cells}x{labels}")]
    DimensionMismatch {
        expected_cells: usize,
        expected_labels: usize,
        cells: usize,
        labels: usize,
    },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("invalid predictor: {0}")]
    InvalidPredictor(String),
    #[error("invalid mixture weights: {0}")]
    InvalidWeights(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("sample ({cell}, {label}) out of range for a {num_cells}x{num_labels} dataset")]
    SampleOutOfRange {
        cell: usize,
        label: usize,
        num_cells: usize,
        num_labels: usize,
    },
    #[error("invalid learner: {0}")]
    InvalidLearner(String),
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("enumeration limit exceeded: {0}")]
    EnumerationLimit(String),
    #[error("nothing to summarize: {0}")]
    EmptySummary(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }
}
