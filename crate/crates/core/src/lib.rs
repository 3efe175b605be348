//! Radial spectral solver for the fractional Choquard equation
//! `(-Δ)^s u + u = 2 (I₂ ⋆ u²) u` in three dimensions.
//!
//! The crate is organised bottom-up:
//!
//! * [`radial`] grids, profiles, quadrature and differentiation
//! * [`transform`] spherical Bessel transforms per harmonic sector
//! * [`potential`] fractional Laplacian, resolvent, Newton potential and norms
//! * [`ground_state`] normalized fixed-point solver and sweeps in `s`
//! * [`spectrum`] sector-wise linearized operators and nondegeneracy checks
//! * [`continuation`] the pseudo-minimizer Newton/fixed-point scheme from `s = 1`
//! * [`extension`] Caffarelli–Silvestre half-space realization of `(-Δ)^s`
//! * [`oracle`] independent finite-difference solver at `s = 1`
//! * [`io`] profile cache and report files

pub mod continuation;
pub mod error;
pub mod extension;
pub mod ground_state;
pub mod io;
pub mod oracle;
pub mod potential;
pub mod radial;
pub mod spectrum;
mod tridiag;
pub mod transform;

pub use error::{Error, Result};
pub use radial::{make_grid, RadialGrid, RadialProfile};
