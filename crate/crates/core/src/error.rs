//! Error type shared by every stage of the calibration pipeline.

use thiserror::Error;

use crate::bk::{Certificate, IterationTrace};
use crate::med::ValidationReport;

pub type Result<T> = std::result::Result<T, MedError>;

#[derive(Debug, Error)]
pub enum MedError {
    /// An argument outside the mathematical domain of a function.
    #[error("{what}: argument {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },

    /// Inverse-Langevin input outside the method's admissible interval.
    #[error("{method}: input {value} is outside the admissible interval (|y| < {bound})")]
    OutOfDomain {
        method: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("root finder did not converge: last iterate {last}, residual {residual:e}")]
    IterationFailure { last: f64, residual: f64 },

    #[error("invalid strike grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quotes admit arbitrage: {0}")]
    Arbitrage(ValidationReport),

    /// Digital prices that do not produce positive bucket masses.
    #[error("digital prices give a non-positive mass {mass:e} in bucket {bucket}")]
    InfeasibleDigitals { bucket: usize, mass: f64 },

    /// A conditional bucket mean that leaves its open bucket.
    #[error("bucket {bucket}: conditional mean {mean} is outside ({lower}, {upper})")]
    InfeasibleMean {
        bucket: usize,
        mean: f64,
        lower: f64,
        upper: f64,
    },

    /// The call quotes leave no interior point for the digital prices.
    #[error("no interior feasible digital price at strike index {index}: interval ({lower}, {upper}) is empty")]
    EmptyFeasibleSet {
        index: usize,
        lower: f64,
        upper: f64,
    },

    #[error("digital {index} = {value} is outside the feasible interval ({lower}, {upper})")]
    NotInFeasibleSet {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("quotes carry no digital prices")]
    MissingDigitals,

    #[error("matrix is not negative definite (pivot {pivot:e} at row {row})")]
    NotNegativeDefinite { row: usize, pivot: f64 },

    #[error("entropy maximisation stopped after {} iterates: {reason}", trace.records.len())]
    NonConvergence {
        reason: String,
        trace: Box<IterationTrace>,
        certificate: Option<Box<Certificate>>,
    },
}

impl MedError {
    /// True for errors that mean the inputs sit outside the feasible set.
    pub fn is_infeasibility(&self) -> bool {
        matches!(
            self,
            MedError::InfeasibleDigitals { .. }
                | MedError::InfeasibleMean { .. }
                | MedError::EmptyFeasibleSet { .. }
                | MedError::NotInFeasibleSet { .. }
        )
    }
}
