//! Simulation and inference for finite-range Gibbs point processes on
//! rectangular windows of the plane.
//!
//! The crate is organised bottom-up: [`geometry`] holds configurations and
//! windows, [`energy`] the energy functions, [`sampler`] the exact and MCMC
//! samplers, [`oracle`] a brute-force series reference for tiny windows,
//! [`estimate`] the parameter estimators and [`experiment`] canned checks
//! built from the pieces.

pub mod disks;
pub mod energy;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod geometry;
pub mod germ_grain;
pub mod sampler;
pub mod stats;
pub mod io;
pub mod oracle;

pub use energy::{EnergyModel, PairPotential};
pub use error::{Error, Result};
pub use geometry::{BoundaryCondition, Move, Point, PointConfiguration, Window};
