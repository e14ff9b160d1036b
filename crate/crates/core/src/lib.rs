//! Entanglement dynamics of free-fermion chains under projective measurements
//! of the subsystem particle number, in the quasiparticle picture.
//!
//! The crate is organised bottom-up:
//!
//! - [`states`]: band structure and initial-state occupations;
//! - [`counting`]: configuration classes of quasiparticle pairs and their measures;
//! - [`fluctuations`]: charge variances, number entropy, asymmetry;
//! - [`saddle`]: saddle-point equations for the measurement outcomes;
//! - [`entropy`]: assembled entropy predictions;
//! - [`probability`]: outcome statistics and Monte-Carlo averages;
//! - [`neel`]: exact closed forms for the Néel state;
//! - [`extensions`]: full counting statistics and other measurement geometries.

pub mod counting;
pub mod entropy;
pub mod error;
pub mod extensions;
pub mod fluctuations;
pub mod intervals;
pub mod neel;
pub mod probability;
pub mod quadrature;
pub mod saddle;
pub mod states;

pub use error::{Error, Result};
