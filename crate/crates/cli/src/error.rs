use drtarget_core::ingest::IngestError;
use drtarget_core::response::ResponseError;
use drtarget_core::solver::SolverError;
use drtarget_core::tradeoff::TradeoffError;
use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 2,
            Self::Data(_) => 3,
            Self::Infeasible(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Data(format!("{}: {e}", path.display()))
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::InvalidSpec(_) => Self::Validation(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

impl From<ResponseError> for CliError {
    fn from(e: ResponseError) -> Self {
        match e {
            ResponseError::EmptyPopulation | ResponseError::Format(_) => Self::Data(e.to_string()),
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        use SolverError::*;
        match e {
            NoFeasiblePortfolio => Self::Infeasible(e.to_string()),
            LengthMismatch { .. } | NonFinite { .. } | NegativeVariance { .. } | EmptyPool => {
                Self::Data(e.to_string())
            }
            _ => Self::Validation(e.to_string()),
        }
    }
}

impl From<TradeoffError> for CliError {
    fn from(e: TradeoffError) -> Self {
        match e {
            TradeoffError::Solver(s) => s.into(),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Data(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
