use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CasimirError {
    #[error("invalid input: {0}")]
    Domain(String),

    #[error("{what} did not converge: last two estimates {previous:e} and {current:e}")]
    Convergence {
        what: String,
        previous: f64,
        current: f64,
    },

    #[error("numerical range exceeded at kappa*R = {kappa}, m = {m}: {detail}")]
    NumericalRange { kappa: f64, m: i64, detail: String },

    #[error("rank-deficient least-squares problem: {0}")]
    RankDeficient(String),
}

pub type Result<T> = std::result::Result<T, CasimirError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(CasimirError::Domain(msg.into()))
}
