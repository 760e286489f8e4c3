//! Multi-frequency subspace migration for thin, curve-like electromagnetic
//! inclusions.
//!
//! The crate synthesizes far-field Multi-Static Response (MSR) matrices from
//! the leading-order asymptotic expansion of the scattered field, extracts the
//! signal subspace of each matrix by a complex SVD, and images the supporting
//! curve with single-frequency, multi-frequency, power-weighted and
//! log-weighted subspace migration. Closed-form Bessel-sum structures of the
//! imaging functionals live in [`analysis`] and can be compared against the
//! SVD-based maps.
//!
//! Module map:
//!
//! * [`specfun`]: Bessel `J_n`, Gamma, adaptive Simpson quadrature and the
//!   weighted `J_0^2` integral identities.
//! * [`geometry`]: parametric curves, frames and arclength sampling.
//! * [`forward`]: direction sets, MSR assembly, calibrated AWGN and the MSR file format.
//! * [`spectral`]: one-sided Jacobi complex SVD and singular-value thresholding.
//! * [`imaging`]: steering vectors and the imaging functionals.
//! * [`analysis`]: analytic map structures and the `E1`/`E2` diagnostics.
//! * [`harness`]: configuration, presets, experiment runner, metrics and exports.

pub mod analysis;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod harness;
pub mod imaging;
pub mod linalg;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::Vec2;
pub use num_complex::Complex64;
