//! Recursive set-membership parameter estimation on top of recursive least squares.
//!
//! The RLS identifier produces a point estimate; the estimators in [`lti`]
//! and [`ltv`] wrap it with an interval that is guaranteed to contain the
//! true parameter whenever the prior box and the noise bounds hold.
//! [`pe`] computes the excitation and stability constants, and [`sim`]
//! generates synthetic data and runs Monte Carlo experiments.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod interval;
pub mod lti;
pub mod ltv;
pub mod oracle;
pub mod pe;
pub mod radius;
pub mod rls;
pub mod sim;
pub mod window;

pub use nalgebra;

pub use error::{Error, Result};
pub use interval::{tightest_image, Intersection, IntervalVector};
pub use lti::{monotonic_update, IntervalEstimate, LtiConfig, LtiEstimator};
pub use ltv::{drift_monotonic_update, DriftBounds, LtvEstimator};
pub use radius::{RadiusMode, DEFAULT_MAX_HORIZON};
pub use rls::{RlsConfig, RlsState};
