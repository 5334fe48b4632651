//! Computational core for inverse spectral problems on bi-axisymmetric plane
//! domains: from the boundary Taylor jet at the bouncing-ball axis to billiard
//! Poincaré maps, classical and semiclassical Birkhoff normal forms, Lazutkin
//! straightening data and the inversion back to the jet. A billiard simulator
//! and a Dirichlet eigensolver act as independent numerical oracles.

pub mod error;
pub mod domain;
pub mod series;
pub mod classical;
pub mod billiard;
pub mod qnf;
pub mod wave;

pub use error::{Error, Result};
pub use series::{Basis, ChebGrid, Poly2, SFun, Series3, SeriesMap};
