//! Coleman-Gurtin heat conduction with dynamic boundary conditions and memory on
//! a periodic strip: kernels, discretization, history representations, time
//! stepping and the diagnostics used to study its long-time behaviour.
//!
//! Every numerical type is generic over [`scalar::Real`]; the `*64` and `*32`
//! aliases fix the scalar.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod discretization;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod memory;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = discretization::Grid<f64>;
pub type Grid32 = discretization::Grid<f32>;
pub type MemoryKernel64 = kernels::MemoryKernel<f64>;
pub type MemoryKernel32 = kernels::MemoryKernel<f32>;
pub type WentzellOperator64 = discretization::WentzellOperator<f64>;
pub type WentzellOperator32 = discretization::WentzellOperator<f32>;
pub type RunConfig64 = dynamics::RunConfig<f64>;
pub type RunConfig32 = dynamics::RunConfig<f32>;
pub type Simulation64 = dynamics::Simulation<f64>;
pub type Simulation32 = dynamics::Simulation<f32>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type Trajectory32 = dynamics::Trajectory<f32>;
