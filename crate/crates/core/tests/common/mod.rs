//! Reference implementations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

const TRAPEZOID_POINTS: usize = 256;

/// `J_n(x) = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt`. The integrand is
/// smooth and periodic, so the trapezoid rule converges geometrically once
/// the point count exceeds roughly `x + 30`.
pub fn bessel_ref(n: u32, x: f64) -> f64 {
    assert!(
        x.abs() < 150.0,
        "reference Bessel only resolved for |x| < 150"
    );
    let h = 2.0 * PI / TRAPEZOID_POINTS as f64;
    let s: f64 = (0..TRAPEZOID_POINTS)
        .map(|k| {
            let t = h * k as f64;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum();
    s / TRAPEZOID_POINTS as f64
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Composite 20-point Gauss-Legendre with panels no wider than `max_width`.
pub fn integrate_ref<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, max_width: f64) -> f64 {
    let (x, w) = gauss_legendre(20);
    let panels = ((b - a) / max_width).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| wi * f(mid + 0.5 * h * xi))
            .sum();
        total += 0.5 * h * s;
    }
    total
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}
