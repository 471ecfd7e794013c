//! Annual time-series econometrics for rate/impact-factor studies.
//!
//! The crate is organised bottom-up:
//!
//! - [`dist`]: special functions, CDFs and p-value helpers
//! - [`linalg`]: a small dense matrix type and Householder QR
//! - [`series`]: year-indexed series, the aligned [`series::Dataset`], descriptive statistics
//! - [`ingest`]: FRED / World Bank CSV parsing, annualisation, imputation, provenance
//! - [`synth`]: seeded generators for the impact-factor and real-rate paths
//! - [`ols`]: model specs, design matrices, least squares with classical/HC/HAC covariance
//! - [`diagnostics`]: residual tests, ACF/PACF and the Chow break test
//! - [`extend`]: lag model, quadratic model and quantile regression

pub mod diagnostics;
pub mod dist;
pub mod extend;
pub mod ingest;
pub mod linalg;
pub mod ols;
pub mod series;
pub mod serde_f64;
pub mod synth;

mod error;

pub use error::{Error, Result};
