//! Horizontal calculus on the Heisenberg group H^n, pointwise and integral
//! checkers for the generalized Picone and Diaz-Saa inequalities, and a
//! variational solver for the quasilinear Dirichlet problem
//! -Delta_{H,p} u = f(x,u), demonstrating existence and uniqueness of the
//! positive solution at desk scale.

pub mod error;
pub mod hcalc;
pub mod hgroup;
pub mod picone;
pub mod solver;
pub mod tolerances;

pub use error::{Error, Result};
