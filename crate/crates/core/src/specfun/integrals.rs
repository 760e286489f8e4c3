//! Closed forms for weighted integrals of `J_0^2`.
//!
//! Both identities follow from `d/dx J_0 = -J_1` and
//! `d/dx (J_0^2 + J_1^2) = -2 J_1^2 / x`; the leftover `J_1^2` term has no
//! elementary antiderivative and is integrated numerically.

use super::bessel::{bessel_envelope, j1};
use super::quad::{quad_adaptive, Quadrature};
use crate::error::{Error, Result};

/// `int_a^b J_0(x)^2 dx = [x (J_0^2 + J_1^2)]_a^b + int_a^b J_1(x)^2 dx`.
pub fn integral_j0sq(a: f64, b: f64, q: &Quadrature) -> Result<f64> {
    if !(a >= 0.0) || !(b >= a) || !b.is_finite() {
        return Err(Error::domain(format!(
            "integral_j0sq requires 0 <= a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let boundary = b * bessel_envelope(b) - a * bessel_envelope(a);
    let rest = quad_adaptive(
        |x| {
            let v = j1(x);
            v * v
        },
        a,
        b,
        q,
    )?;
    Ok(boundary + rest)
}

/// `int_a^b ln(x) J_0(x)^2 dx = [(x ln x - x)(J_0^2 + J_1^2)]_a^b + int_a^b (ln x - 2) J_1(x)^2 dx`
/// for `0 < a <= b`.
pub fn integral_log_j0sq(a: f64, b: f64, q: &Quadrature) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::domain(format!(
            "integral_log_j0sq requires a > 0, got {a}"
        )));
    }
    if !(b >= a) || !b.is_finite() {
        return Err(Error::domain(format!(
            "integral_log_j0sq requires a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let antiderivative = |x: f64| (x * x.ln() - x) * bessel_envelope(x);
    let boundary = antiderivative(b) - antiderivative(a);
    let rest = quad_adaptive(
        |x| {
            let v = j1(x);
            (x.ln() - 2.0) * v * v
        },
        a,
        b,
        q,
    )?;
    Ok(boundary + rest)
}
