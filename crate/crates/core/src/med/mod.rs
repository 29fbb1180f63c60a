//! Maximum-entropy density given calls and digitals on a strike grid.

mod density;
mod quotes;

pub use density::{
    bucket_masses, bucket_means, build_density, build_density_with_digitals, solve_betas,
    BucketParams, PiecewiseExpDensity,
};
pub use quotes::{validate_quotes, MarketQuotes, ValidationReport, Violation};
