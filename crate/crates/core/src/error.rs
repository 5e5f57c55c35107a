use thiserror::Error;

use crate::model::Electronic;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("states live on different bases")]
    BasisMismatch,

    #[error("electronic block {0} is not part of the basis")]
    MissingBlock(Electronic),

    #[error("oscillator quanta {quanta} exceed the supported cap of {cap}")]
    QuantaCap { quanta: usize, cap: usize },

    #[error("state loses {loss:.3e} of its norm to truncation at cutoff {cutoff}; a cutoff of at least {required} is needed")]
    Truncation { loss: f64, cutoff: usize, required: usize },

    #[error("excitation exceeds the basis cutoff {cutoff}")]
    CutoffOverflow { cutoff: usize },

    #[error("the donor and acceptor surfaces are parallel (d = 0); no ridge line exists")]
    NoRidge,

    #[error("the ridge line is not reached by the Franck-Condon trajectory (1 - de/(2 Lambda) = {0:.6})")]
    UnreachableRidge(f64),

    #[error("block {0} carries no population")]
    EmptyBlock(Electronic),

    #[error("eigensolver failed to converge for matrix {hash:016x} (dimension {dim})")]
    EigenFailure { hash: u64, dim: usize },

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("signal is identically zero on the grid")]
    FlatSignal,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
