use thiserror::Error;

pub type Result<T, E = SlimError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SlimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("feature index {index} out of range for {features} features")]
    FeatureOutOfRange { index: usize, features: usize },

    #[error("no rule with finite objective remains")]
    NoRuleFound,

    #[error("unknown fault type `{0}`")]
    UnknownFaultType(String),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("search budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl SlimError {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            SlimError::InvalidArgument(_) => "invalid-argument",
            SlimError::InvalidDataset(_) => "invalid-dataset",
            SlimError::FeatureOutOfRange { .. } => "invalid-argument",
            SlimError::NoRuleFound => "no-rule-found",
            SlimError::UnknownFaultType(_) => "invalid-argument",
            SlimError::Schema(_) => "schema",
            SlimError::BudgetExceeded(_) => "budget-exceeded",
            SlimError::Io(_) => "io",
            SlimError::Json(_) => "json",
        }
    }
}
