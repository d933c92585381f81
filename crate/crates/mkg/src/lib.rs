//! Numerical laboratory for a classical Maxwell field coupled to a complex
//! nonlinear Klein-Gordon matter field through the linear interaction
//! `beta (phi dS/dt + A . grad S) u`.
//!
//! The crate computes radially symmetric ground-state solitons of the
//! stationary system, verifies their integral identities (charge, mass,
//! momentum, energy split, Pohozaev-Derrick), constructs Lorentz-boosted
//! moving solitons on a lattice, evolves the full coupled system with a
//! leapfrog scheme, and compares soliton trajectories in external fields
//! against the relativistic Lorentz-force equation.
//!
//! Scalar-generic kernels (potentials, quadrature, the particle pusher) are
//! written over [`scalar::Scalar`]; the lattice pipeline and all file formats
//! are pinned to `f64` ([`Real`]) by the snapshot wire format.

pub mod boost;
pub mod error;
pub mod evolve;
pub mod io;
pub mod lattice;
pub mod observables;
pub mod particle;
pub mod potentials;
pub mod radial;
pub mod scalar;

mod fft;
mod interp;

/// Concrete scalar used by the solver pipeline and every file format.
pub type Real = f64;
/// Complex matter-field sample.
pub type Cplx = num_complex::Complex<Real>;

pub use error::{Error, Result};
pub use potentials::PotentialSpec;
