//! Equivariant band-operator families over symbolic dynamical systems on ℤ^N
//! and the discrete Heisenberg group, with finite-section spectra,
//! pseudospectra, limit-operator probes and constancy reports.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod group;
pub mod operators;
pub mod rng;
pub mod spectral;

pub use error::{HullError, Result};
pub use group::{GroupElement, GroupSpec, Window};
