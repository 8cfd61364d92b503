//! Symmetric hyperbolic evolution of the vacuum Einstein and Einstein-Euler
//! equations in a Lagrangian orthonormal frame on the periodic 3-torus.
//!
//! The evolved unknowns are the coframe `(a, b)`, the rotation coefficients
//! `(omega, X, Y)`, the Riemann tensor in the frame and, for a fluid, the
//! energy density. Constraint, symmetry and gauge identities that the
//! continuum system propagates are computed by [`monitor`].

pub mod cli_io;
pub mod error;
pub mod frame_state;
pub mod initial_data;
pub mod integrator;
pub mod monitor;
pub mod system;
pub mod tiles;

pub use error::{Error, Result};
pub use frame_state::{Eos, GridState};
