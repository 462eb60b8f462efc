//! Per-app network-slice traffic forecasting and provisioning evaluation.
//!
//! The pipeline runs end to end on synthetic crowd-sourced traces:
//! generate a trace, build the feature view available to a stakeholder
//! (the operator, a vertical service provider, or both), train a
//! forecaster on the first three weeks, predict the last week, and score
//! the resulting slice-provisioning decisions by prediction error,
//! unused capacity, and scale-up events.

pub mod chart;
pub mod config;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod forecast;
pub mod io;
pub mod synth;
pub mod trace;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
