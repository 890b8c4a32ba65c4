//! Scattering theory and dispersive decay for the discrete Schrödinger
//! operator H = −Δ + q on ℤ and the lattice Klein–Gordon equation
//! ü = (Δ − μ² − q)u.
//!
//! The crate builds Jost solutions, scattering data, resonance and bound-state
//! diagnostics, oscillatory-integral quadrature with van der Corput
//! certificates, propagator kernels by several independent routes, and a
//! decay-rate laboratory that fits time exponents of weighted operator norms.

pub mod bessel;
pub mod config;
pub mod decay;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod jost;
pub mod norms;
pub mod oscillatory;
pub mod potential;
pub mod propagator;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
pub use norms::{weighted_norm, WeightedSeq};
pub use potential::Potential;
pub use spectral::{omega_of_theta, theta_of_omega, Side, SpectralPoint, ThetaGrid, C64};
