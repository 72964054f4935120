//! Equilibria of rotating self-gravitating fluids.
//!
//! The crate covers three families of solutions:
//!
//! * radial Lane-Emden polytropes and their mass function ([`radial`]),
//! * incompressible Maclaurin spheroids ([`maclaurin`]),
//! * compressible, differentially rotating stars found by a mass-constrained
//!   self-consistent field iteration ([`scf`]) and continued in the rotation
//!   intensity until the family leaves the grid or the validity region
//!   ([`continuation`]).
//!
//! All quantities use `G = 1`. Axisymmetric fields live on a cylindrical grid
//! over the `z >= 0` half-plane ([`gravity`]).

// Negated float comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod continuation;
pub mod error;
pub mod gravity;
pub mod maclaurin;
pub mod quad;
pub mod radial;
pub mod rotation;
pub mod scf;

pub use error::{Error, Result};
