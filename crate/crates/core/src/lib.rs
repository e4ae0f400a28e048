//! Exact analysis and event-driven simulation of finite elastic interacting
//! particle systems on the integer lattice.
//!
//! * [`model`]: parameters, configurations, the jump-rate law and exact
//!   one-step expectation oracles.
//! * [`majorant`]: least concave majorant of the potential path and the
//!   resulting cloud decomposition.
//! * [`engine`]: seeded continuous-time simulation (elastic, exclusion,
//!   rank-labelled and jump-chain modes) and derived observables.
//! * [`analysis`]: estimators for speeds, span tails, occupation times,
//!   separations and empirical stationary laws.
//! * [`stationary`]: the closed-form two-particle stationary law and
//!   Kolmogorov cycle checks on the gap chain.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod majorant;
pub mod model;
pub mod rational;
pub mod stationary;

pub use error::{Error, Result};
pub use rational::Rational;
