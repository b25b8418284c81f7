//! Frequency-space toolbox for the BBM equation `u_t - u_xxt + u_x + u u_x = 0`
//! written in multiplier form `i u_t = phi(D) u + (1/2) phi(D) u^2` with
//! `phi(xi) = xi / (1 + xi^2)`.
//!
//! Everything lives on a uniform symmetric frequency lattice: a fine lattice
//! (small `delta_xi`) stands in for the real line, an integer lattice
//! (`delta_xi = 1`) is the torus. On top of that sit the closed-form symbols,
//! the counterexample data families concentrated near `|xi| = N`, the Duhamel
//! integral / Picard expansion machinery with two independent routes to the
//! second iterate, and a plain RK4 time integrator with conservation
//! diagnostics.
//!
//! Transforms use the unitary `1/sqrt(2*pi)` convention throughout, so the
//! spectrum of a pointwise product is the lattice convolution weighted by
//! `delta_xi / sqrt(2*pi)`. Products are dealiased exactly by zero padding;
//! reductions use a fixed summation order so identical inputs give identical
//! bits on a given platform.

mod conv;
mod error;

pub mod data;
pub mod field;
pub mod grid;
pub mod picard;
pub mod solver;
pub mod symbols;

pub use error::{Result, SpectralError};
pub use field::SpectralField;
pub use grid::{FrequencyGrid, GridMode};
pub use picard::{AXiSet, PicardExpansion, Trajectory};
pub use solver::{Scheme, SolverConfig};

/// `1/sqrt(2*pi)`, the unitary Fourier normalization used everywhere.
pub const FOURIER_NORM: f64 = 0.398_942_280_401_432_7;

/// Relative tolerance for detecting Hermitian symmetry of a spectrum.
pub const HERMITIAN_REL_TOL: f64 = 1e-12;

/// Relative threshold below which a coefficient does not count as spectral
/// support (used by the half-radius guards on quadratic operations).
pub const SUPPORT_REL_TOL: f64 = 1e-12;
