//! Optimal defense strategies against advanced persistent threats on an
//! organization's access network.

// Parameter checks are written as `!(v > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fbsm;
pub mod grid;
pub mod metrics;
pub mod netgraph;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete double-precision types.
pub type BoundsF64 = control::Bounds<f64>;
pub type ControlTrajectoryF64 = control::ControlTrajectory<f64>;
pub type ModelParamsF64 = dynamics::ModelParams<f64>;
pub type AttackStrategyF64 = dynamics::AttackStrategy<f64>;
pub type SolverConfigF64 = fbsm::SolverConfig<f64>;
pub type SolveReportF64 = fbsm::SolveReport<f64>;
pub type InstanceF64 = experiments::Instance<f64>;

/// Concrete single-precision types.
pub type BoundsF32 = control::Bounds<f32>;
pub type ControlTrajectoryF32 = control::ControlTrajectory<f32>;
pub type ModelParamsF32 = dynamics::ModelParams<f32>;
pub type AttackStrategyF32 = dynamics::AttackStrategy<f32>;
pub type SolverConfigF32 = fbsm::SolverConfig<f32>;
pub type SolveReportF32 = fbsm::SolveReport<f32>;
pub type InstanceF32 = experiments::Instance<f32>;
