//! The particle system itself: parameters, configurations, the jump-rate law,
//! the potential path and exact one-step expectation oracles.
//!
//! Particle labels are 1-based throughout the public API (`Club`, cloud
//! intervals, JSON output), matching the usual way the model is written down.
//! Slices and vectors are of course 0-based underneath.

mod config;
mod drift;
mod params;
mod potential;
mod rates;

pub use config::{Club, Configuration, GapVector};
pub use drift::{
    expected_change, expected_increment, expected_partial_increment, lyapunov_psi,
    lyapunov_psi_squared, velocity_pairing,
};
pub use params::SystemParams;
pub use potential::{centre_of_mass, club_centre_of_mass, potential_path, PotentialPath};
pub use rates::{exclusion_rates, jump_rates, rates_for, Interaction, Jump, RateVector};
