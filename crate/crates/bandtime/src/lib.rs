//! Quantized arrival-time distributions for 1D quantum scattering.
//!
//! A particle restricted to a finite energy band (eps0, eps0 + delta_eps)
//! with periodic boundary conditions in the energy representation admits a
//! self-adjoint time operator i d/deps + eta(eps) whose eigenvalues are
//! quantized in steps of 2 pi / delta_eps. This crate builds the pieces
//! end to end: transfer-matrix scattering on delta + piecewise-constant
//! potentials, the band representation with its Simpson quadrature and
//! stencil derivatives, the time-operator spectral machinery, the tunneling
//! arrival workflow (mean transmission, phase/traversal/Keldysh time
//! scales, Hartman comparison) and an independent brute-force oracle layer.
//!
//! Everything is in Hartree atomic units with the particle mass fixed to 1.
//!
//! Heavy grid loops are data-parallel via rayon when the default `parallel`
//! feature is enabled and run sequentially otherwise; results are identical
//! either way.

pub mod arrival;
pub mod band;
pub mod error;
pub mod oracle;
mod par;
pub mod scattering;
pub mod timeop;

pub use error::{Error, Result};
