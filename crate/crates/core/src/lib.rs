//! Gaussian-process regression over mixed continuous, integer and
//! categorical inputs, with several families of categorical kernels.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which the benchmarks and CLI use.

// `!(a < b)` is used on purpose so NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmarks;
pub mod doe;
pub mod error;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod optimizer;
pub mod scalar;
pub mod space;

pub use error::{Error, Result};
pub use gp::{concentrated_log_likelihood, correlation_matrix, fit, FitConfig, GpModel};
pub use kernels::{CategoricalKernelKind, ExponentPower, HyperparameterSet, SymmetricHyperMatrix};
pub use scalar::Scalar;
pub use space::{Dataset, DesignSpace, MixedPoint, VariableSpec};

pub type Point = MixedPoint<f64>;
pub type Data = Dataset<f64>;
pub type Model = GpModel<f64>;
pub type Hyperparameters = HyperparameterSet<f64>;
pub type Matrix = linalg::Mat<f64>;

pub type Point32 = MixedPoint<f32>;
pub type Data32 = Dataset<f32>;
pub type Model32 = GpModel<f32>;
