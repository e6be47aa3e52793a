//! Uniformly rotating star-planet equilibria of the Euler-Poisson system with a
//! polytropic pressure law, computed by constrained energy minimization on
//! uniform grid patches.
//!
//! Units are fixed throughout: gravitational constant `G = 1` and total fluid
//! mass `1` for star-planet configurations.
//!
//! The crate is organised bottom-up:
//!
//! * [`eos`] - the polytropic law `P = K rho^gamma` and the derived convex
//!   internal-energy density `A`, its derivative and inverse derivative.
//! * [`field`] - grid densities, free-space potentials by zero-padded FFT
//!   convolution, multipole far fields and the energy functionals.
//! * [`lane_emden`] - the radial non-rotating minimizer and its mass scaling.
//! * [`minimizer`] - the self-consistent-field solver for the two-ball problem.
//! * [`diagnostics`] - measurements mapping solver output onto the rate laws,
//!   separation windows and component-distance thresholds.

pub mod diagnostics;
pub mod eos;
mod error;
pub mod field;
pub mod lane_emden;
pub mod minimizer;
pub mod quadrature;
pub mod testing;
pub mod vec3;

pub use error::{Error, Result};
