//! Simulation engine for engineered-reservoir protection of time-dependent
//! two-level superposition states: a driven two-level system in a leaky
//! cavity, integrated both as the full thermal master equation and as the
//! reduced effective model obtained by adiabatic elimination of the cavity.
//!
//! Internal units: the atomic decay rate γ = 1; all other rates are in units
//! of γ and time in units of 1/γ.

pub mod analysis;
pub mod error;
pub mod integrate;
pub mod ion_cavity;
pub mod lindblad;
pub mod operator;
pub mod validate;

#[cfg(test)]
pub(crate) mod test_util;

pub use error::{Error, Result};
