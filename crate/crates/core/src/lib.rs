//! Maximum-entropy calibration of an asset-price density to option quotes.
//!
//! * [`langevin`]: the Langevin function and inverse approximations.
//! * [`partition`]: strike buckets and their log-partition functions.
//! * [`med`]: the density implied by calls and digitals.
//! * [`bk`]: the density implied by calls alone, with convergence bounds.
//! * [`cli`]: the `medcal` command-line front end.

pub mod bk;
pub mod cli;
pub mod error;
pub mod langevin;
pub mod med;
pub mod partition;
pub mod tridiag;

pub use error::{MedError, Result};
