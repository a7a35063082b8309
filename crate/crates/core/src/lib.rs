//! Stationary Gaussian entanglement between microwave cavities that share a
//! mechanical resonator with an optical cavity, in the linearized regime.
//!
//! The pipeline is: [`physics`] turns device parameters into effective
//! couplings, [`dynamics`] builds the drift and diffusion matrices and checks
//! stability, [`steady_state`] solves the Lyapunov equation for the
//! covariance matrix, and [`entanglement`] computes the logarithmic
//! negativity of any two modes. [`harness`] sweeps parameters over grids.

pub mod constants;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod physics;
pub mod steady_state;

pub use error::{Error, Result};
