//! Pseudospectral laboratory for the semi-relativistic Hartree ("boson star")
//! equation `-i du/dt + sqrt(m^2 - Lap) u = (V * |u|^2) u` with the
//! Yukawa/Coulomb potential `V(x) = exp(-mu0 |x|)/|x|`, and for its
//! Dirac-Hartree companion system.
//!
//! The crate evolves the PDE on periodic 3-D and radial grids, tracks
//! conserved quantities and scattering diagnostics, and stress-tests the
//! dispersive free-wave estimates the analysis of this equation rests on:
//! radial and localized Strichartz bounds, bilinear L2 bounds, a trilinear
//! interaction functional, and the 1-D reduction of the delta-constrained
//! bilinear kernel integral, each against an independent oracle.

pub mod bands;
pub mod dirac;
pub mod error;
pub mod estimates;
pub mod experiment;
pub mod fft;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod field_ops;
pub mod propagator;
pub mod radial;
pub mod solver;
pub(crate) mod par;
pub(crate) mod rng;
pub mod symbols;
pub mod variation;

pub use error::{LabError, Result};

/// Cap the worker pool used by parameter sweeps (no-op once a pool exists
/// or when the `parallel` feature is off).
pub fn set_threads(n: usize) {
    par::set_threads(n);
}

pub use field::SpectralField;
pub use grid::FourierGrid;
pub use radial::{RadialField, RadialGrid};
