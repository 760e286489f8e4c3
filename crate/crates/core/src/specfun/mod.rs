//! Special functions and quadrature.
//!
//! Everything here is pure and allocation-free, so it can be called from any
//! number of threads.

mod bessel;
mod gamma;
mod integrals;
mod quad;

pub use bessel::{bessel_envelope, bessel_j, j0, j1, ASYMPTOTIC_THRESHOLD};
pub use gamma::gamma_fn;
pub use integrals::{integral_j0sq, integral_log_j0sq};
pub use quad::{quad_adaptive, Quadrature};

#[doc(hidden)]
pub use bessel::{bessel_asymptotic, bessel_series};
