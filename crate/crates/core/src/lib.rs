//! Numerical engine for Hong-Ou-Mandel interference and coincidence
//! imaging with twisted (orbital-angular-momentum) photon pairs.
//!
//! The crate is organized along the simulation pipeline:
//!
//! - [`math`]: Bessel functions, Gauss-Legendre rules, polar quadrature
//! - [`states`]: pulse envelopes, wave-packet functions, the reflection
//!   rule of the beam splitter, and the two-photon state families
//! - [`hom`]: bunching and coincidence probabilities, analytic and by
//!   k-space quadrature, including delay scans
//! - [`imaging`]: phase-mask overlap integrals, output-port densities,
//!   coincidence images, the re-scaled texture signal, SNR maps, the
//!   coherent-state baseline, and the encryption round trip
//! - [`mask`], [`pnm`], [`config`]: texture definitions, PGM/CSV I/O,
//!   and the strict JSON configuration surface

pub mod config;
pub mod error;
pub mod hom;
pub mod imaging;
pub mod mask;
pub mod math;
pub mod pnm;
pub mod states;

pub use error::{Error, Result};

/// Engine version string recorded in every output directory.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
