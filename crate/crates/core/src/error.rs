use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("factorization of correlation block (ue {ue}, oru {oru}) failed: {reason}")]
    Factorization {
        ue: usize,
        oru: usize,
        reason: String,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("drop {drop_index}: {source}")]
    Drop {
        drop_index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("episode {episode}, step {step}: {source}")]
    Learning {
        episode: usize,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::Domain(_) => "domain",
            Error::Factorization { .. } => "factorization",
            Error::Infeasible(_) => "infeasible",
            Error::TooLarge(_) => "too_large",
            Error::Parse(_) => "parse",
            Error::Drop { source, .. } | Error::Learning { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    pub fn in_drop(self, drop_index: u64) -> Self {
        Error::Drop {
            drop_index,
            source: Box::new(self),
        }
    }
}
