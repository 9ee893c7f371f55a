use thiserror::Error;

/// Errors produced by the simulation, equilibrium and environment layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("inflow {inflow} exceeds first-cell supply {supply} on path {path}")]
    SupplyExceeded { path: usize, inflow: f64, supply: f64 },

    #[error("cannot split positive flow {flow} out of an empty cell")]
    EmptyCellSplit { flow: f64 },

    #[error("negative demand ({human}, {auto})")]
    NegativeDemand { human: f64, auto: f64 },

    #[error("not a point on the simplex: {0}")]
    NotOnSimplex(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("episode is finished; call reset")]
    EpisodeDone,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParams(msg.into())
}
