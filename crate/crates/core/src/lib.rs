//! Complexified Bohmian mechanics for one-dimensional stationary states.
//!
//! * [`complexfn`]: reflection conjugation `f*(z*)` and REAL/IMAG parts.
//! * [`systems`]: the stationary catalog and a free Gaussian packet.
//! * [`dynamics`]: trajectories, crossings, periods, stationary points.
//! * [`conservation`]: density, flux, continuity and conservation verdicts.
//! * [`portrait`]: grid sweeps classifying orbit families.
//! * [`verify`]: the built-in verification report.

pub mod cli;
pub mod complexfn;
pub mod conservation;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod ode;
pub mod portrait;
pub mod systems;
pub mod verify;

pub use error::{Error, Result};
