//! Optimal consumption and investment with relaxed benchmark tracking.
//!
//! The investor may inject capital at unit cost `beta` to keep wealth above a
//! geometric Brownian benchmark. The value function has an explicit dual
//! representation; this crate evaluates it, inverts it to obtain feedback
//! policies, and checks everything against Monte Carlo simulation of the
//! reflected wealth process.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons also reject NaN

pub mod dual;
pub mod error;
mod floatfmt;
pub mod model;
pub mod presets;
pub mod primal;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use model::{BenchmarkParams, DerivedCoefficients, MarketParams, Model, ModelParams, Preferences};
