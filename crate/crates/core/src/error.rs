use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("node index {index} out of range for {len} nodes")]
    NodeOutOfRange { index: usize, len: usize },

    #[error("node {0} succeeds in every slot; the residual slot distribution is undefined")]
    DegenerateResidual(usize),

    #[error("node {0} never transmits successfully; inter-update time is infinite")]
    NoUpdates(usize),

    #[error("strategy ({tau_d}, {tau_w}) is not a point of the payoff grid")]
    OffGrid { tau_d: f64, tau_w: f64 },

    #[error("payoff surface contains a non-finite value at ({tau_d}, {tau_w})")]
    NonFinite { tau_d: f64, tau_w: f64 },

    #[error("simulation made no progress: no successful slot in {slots} slots")]
    NoProgress { slots: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
