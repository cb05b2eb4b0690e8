//! Solver and verification suite for the spatially homogeneous Boltzmann
//! equation for massless particles in a spatially flat FLRW background with
//! scale factor `R(t) = C (t + t₀)^{1/2}`.
//!
//! The library is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix it to `f64`.

// `!(x > 0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod collision;
pub mod config;
pub mod cosmology;
pub mod diagnostics;
pub mod error;
pub mod kinematics;
pub mod quadrature;
pub mod scalar;
pub mod solver;
pub mod state;
pub mod summation;

pub use error::{Error, Result};
pub use scalar::Real;

pub type MomentumVector = kinematics::MomentumVector<f64>;
pub type CollisionPair = kinematics::CollisionPair<f64>;
pub type CosmologyParams = cosmology::CosmologyParams<f64>;
pub type KernelSpec = collision::KernelSpec<f64>;
pub type CollisionRules = collision::CollisionRules<f64>;
pub type RadialRule = quadrature::RadialRule<f64>;
pub type SphereRule = quadrature::SphereRule<f64>;
pub type MomentumGrid = state::MomentumGrid<f64>;
pub type DistributionState = state::DistributionState<f64>;
pub type RunConfig = config::RunConfig<f64>;
pub type Problem = solver::Problem<f64>;
