use thiserror::Error;

use crate::attention::PredictError;
use crate::config::ConfigError;
use crate::neural::NeuralError;
use crate::semantics::{ExecError, KbError, SyntaxError, TypeError};
use crate::transitions::TransitionError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Transition(#[from] TransitionError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{file}:{line}: {message}")]
    Data { file: String, line: usize, message: String },
    #[error("decoding stalled: no legal operation in configuration {0}")]
    DecodeStall(String),
    #[error("no candidates to rank")]
    EmptyCandidates,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn data(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Data {
            file: file.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
