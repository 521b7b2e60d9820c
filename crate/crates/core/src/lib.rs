//! Informative path planning with limited adaptivity.
//!
//! A robot starting at a root point visits sensing locations in a metric
//! space, observes the hidden scenario's value at each, and stops once a
//! submodular coverage target is met. A k-round policy may re-plan only k
//! times. This crate provides the planners ([`planner`]), the ratio group
//! Steiner machinery they rely on ([`embed`], [`lp`], [`steiner`], [`rso`]),
//! instance generators ([`gen`]) and a benchmark harness ([`harness`]).

pub mod embed;
pub mod error;
pub mod gen;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod metric;
pub mod planner;
pub mod rso;
pub mod steiner;

pub use error::{Error, Result};
