//! Buchen–Kelly density from call prices alone.
//!
//! For fixed calls, every feasible digital vector `D` yields a maximum-entropy
//! density through [`crate::med`]. Its entropy `H(D)` is strictly concave on
//! the feasible box and is maximised exactly where the density is continuous
//! at every strike. The gradient of `H` is the vector of log-jumps of the
//! density and its Hessian is tridiagonal, so each Newton step costs `O(n)`.

mod certificate;
mod feasible;
mod solver;

pub use certificate::{certificate, edge_ratios, m1, m2, Certificate};
pub use feasible::{init_digitals, DigitalBounds, INTERIOR_MARGIN};
pub use solver::{
    entropy_gradient, entropy_hessian, maximize_entropy, BkSolution, BkSolver, EntropyProblem,
    IterationTrace, StepKind, TraceRecord, BETA_CAP, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
