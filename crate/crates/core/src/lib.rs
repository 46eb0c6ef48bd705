//! Photon correlations of blinking emitters.
//!
//! An emitter that switches stochastically between periods of different
//! intensity has an intensity correlation `g(τ)` that combines the
//! correlators of the individual periods with the occupation dynamics of the
//! switching chain. This crate provides:
//!
//! - [`period_markov`]: rate matrices, generators, `P_ij(τ)` and steady states;
//! - [`subsystem_optics`]: two-level and dipole-coupled pair correlators;
//! - [`blinking_model`]: the composition and the two-V-system application;
//! - [`lindblad_oracle`]: a master-equation reference solver;
//! - [`stochastic_sim`]: Monte Carlo trajectories and photon streams;
//! - [`fitting`]: least-squares parameter recovery;
//! - [`curve`]: the `(τ, g)` exchange format.
//!
//! The closed-form layers are generic over [`Scalar`] (`f32`, `f64`); the
//! numerical oracle, simulation and fitting layers work in `f64`. The aliases
//! below fix the generic types to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blinking_model;
pub mod curve;
pub mod dense;
pub mod error;
pub mod fitting;
pub mod lindblad_oracle;
pub mod period_markov;
pub mod scalar;
pub mod stochastic_sim;
pub mod subsystem_optics;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Rates = period_markov::TransitionRates<f64>;
pub type Generator = period_markov::GeneratorMatrix<f64>;
pub type Occupancy = period_markov::OccupancyMatrix<f64>;
pub type Steady = period_markov::SteadyProbabilities<f64>;
pub type TwoLevel = subsystem_optics::TwoLevelParams<f64>;
pub type Coupling = subsystem_optics::DipoleCoupling<f64>;
pub type Periods = blinking_model::PeriodSpec<f64>;
pub type VPair = blinking_model::VPairParams<f64>;
