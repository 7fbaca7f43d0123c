use std::path::PathBuf;

use bergman::coherent::CoherentError;
use bergman::field::FieldError;
use bergman::group::GroupError;
use bergman::laplacian::LaplacianError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Coherent(#[from] CoherentError),
    #[error(transparent)]
    Laplacian(#[from] LaplacianError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

impl CliError {
    /// 3 for numerical tolerance failures inside a computation, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Coherent(CoherentError::NoiseBudgetExceeded { .. } | CoherentError::RankDeficientFit) => 3,
            _ => 2,
        }
    }
}
