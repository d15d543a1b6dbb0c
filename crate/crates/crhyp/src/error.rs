//! Error type shared by every evaluator in the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of the operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// The inputs are valid but belong to a regime served by another
    /// operation; `valid_path` names it.
    #[error("{op} is not valid here ({msg}); use {valid_path}")]
    Regime {
        op: &'static str,
        msg: String,
        valid_path: &'static str,
    },

    /// Adaptive quadrature ran out of panel budget. The best estimate and its
    /// error bound are carried along.
    #[error("quadrature did not converge: best estimate {value:e} with error {abs_err:e}")]
    QuadratureBudget { value: f64, abs_err: f64 },

    /// A kernel evaluation finished but its error bound exceeds ten times the
    /// requested tolerance.
    #[error("tolerance not met in {op}: value {value:e}, abs_err {abs_err:e} > 10*tol {tol:e}")]
    ToleranceNotMet {
        op: &'static str,
        value: f64,
        abs_err: f64,
        tol: f64,
    },

    /// The periodization sum hit `k_max` before the tail bound was reached.
    #[error(
        "periodization tail {tail:e} above tail_tol at k_max={k_max}; increase k_max (try {suggested})"
    )]
    WrapTruncated {
        k_max: usize,
        tail: f64,
        suggested: usize,
    },

    /// Command-line usage error (unknown flag, unparsable value, bad path).
    #[error("usage: {0}")]
    Usage(String),

    /// I/O failure while writing output files.
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain {
            op,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
