//! Planar first-passage percolation laboratory.
//!
//! Environments of i.i.d. edge weights on boxes of `ℤ²`, restricted passage
//! times and geodesics, the annulus shift field with its measure-preserving
//! weight transform, and Monte Carlo estimators that check the pathwise
//! inequalities relating them.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiation.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod claims;
pub mod environment;
pub mod estimators;
pub mod geodesic;
pub mod lattice;
pub mod numerics;
pub mod rng;
pub mod scalar;

pub use scalar::Scalar;

pub type Environment = environment::Environment<f64>;
pub type WeightDistribution = environment::WeightDistribution<f64>;
pub type WeightTransform = environment::WeightTransform<f64>;
pub type TauField = environment::TauField<f64>;
pub type GoodSet = environment::GoodSet<f64>;
