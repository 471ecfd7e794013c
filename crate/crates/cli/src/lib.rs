//! Pipeline driver for the interest-rate and impact-factor analysis.

pub mod app;
pub mod config;
pub mod emit;
pub mod error;
pub mod pipeline;
pub mod sweep;
