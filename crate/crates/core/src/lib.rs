//! Mediation analysis with Gaussian-copula structural equation models,
//! D-vine pathway tests, and Sobel / classical / adaptive bootstrap tests.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common types at `f64`.

// `!(x > 0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abtest;
pub mod data;
pub mod error;
pub mod gcopula;
pub mod linalg;
pub mod model;
pub mod optim;
pub mod regression;
pub mod scalar;
pub mod seed;
pub mod simlab;
pub mod special;
pub mod vine;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Dataset = data::Dataset<f64>;
pub type VineDataset = data::VineDataset<f64>;
pub type Matrix = linalg::Matrix<f64>;
pub type DagCoefficients = model::DagCoefficients<f64>;
pub type DagCovariance = model::DagCovariance<f64>;
pub type MarginalSpec = gcopula::MarginalSpec<f64>;
pub type SemSpec = gcopula::SemSpec<f64>;
pub type FittedSem = gcopula::FittedSem<f64>;
pub type PairCopula = vine::PairCopula<f64>;
pub type DVineSpec = vine::DVineSpec<f64>;
pub type DagVineSpec = vine::DagVineSpec<f64>;
pub type TestStatistics = abtest::TestStatistics<f64>;
