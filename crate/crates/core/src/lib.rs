//! Plotting positions, probability-paper regression and parameter-free
//! benchmark indices for location-scale families.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod casestudy;
pub mod distributions;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod order_stats;
pub mod plot;
pub mod positions;
pub mod quadrature;
pub mod report;

pub use distributions::{DistributionSpec, Family, Parent};
pub use error::{Error, Result};
pub use estimation::{FitMethod, FitResult};
pub use order_stats::{CovMode, OrderStatMoments};
pub use positions::{PositionFormula, PositionSet};
