//! Modular flow on unimodular lattices and domain-colored elliptic functions.

pub mod colorize;
pub mod config;
pub mod elliptic;
pub mod encode;
pub mod expr;
pub mod ext;
pub mod lattice;
pub mod orbit;
pub mod reduce;
pub mod render;
pub mod validate;

pub use ext::ExtComplex;
pub use lattice::{flow, make_lattice, Lattice, LatticeError, NormalizedLattice, UnimodularMatrix};
pub use orbit::{solve_periodic_orbit, verify_closure, PeriodicOrbit};
pub use reduce::{reduce_tau, TauReduction};

/// Library version, recorded in render manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
