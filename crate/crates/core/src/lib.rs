//! Numerical laboratory for blow-up of semilinear heat / damped-wave /
//! complex-dissipative equations on the two-dimensional exterior domain
//! |x| > 1 with Dirichlet boundary: a radial finite-difference solver with
//! blow-up detection, and an independent certification pipeline that
//! derives explicit lifespan upper bounds from log-weight cutoff
//! functionals and differential-inequality inversion, cross-checked
//! against each other.

pub mod certifier;
pub mod cutoff;
pub mod error;
pub mod harness;
pub mod model;
pub mod odi;
pub mod quad;
pub mod solver;

pub use error::{Error, Result};
