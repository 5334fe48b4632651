//! Dirichlet spectra of symmetric analytic domains and the smoothed wave
//! trace, whose singularities sit at lengths of periodic billiard orbits.

mod bessel;
mod mps;
mod trace;

pub use bessel::{bessel_j, bessel_j_all};
pub use mps::{class_eigs_below, dirichlet_eigs, spectrum_below, square_eigs, Eigenvalue, MpsOptions, Spectrum, SymClass};
pub use trace::{band_center, default_width, detect_lengths, time_grid, wave_trace, window_weight, Peak, WaveTrace};
