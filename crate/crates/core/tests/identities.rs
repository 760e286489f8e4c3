mod common;

use common::{bessel_ref, integrate_ref, rel_err};
use proptest::prelude::*;
use submig::analysis::{analytic_log, analytic_mf, analytic_wmf, BandLimits, ScattererSet};
use submig::specfun::{bessel_j, integral_j0sq, integral_log_j0sq, j0, j1, Quadrature};
use submig::Vec2;

#[test]
fn reference_bessel_matches_frozen_values() {
    // mpmath, 30 digits
    assert!((bessel_ref(0, 10.0) - -0.24593576445134833).abs() < 1e-14);
    assert!((bessel_ref(1, 50.0) - -0.09751182812517514).abs() < 1e-14);
}

#[test]
fn bessel_agrees_with_integral_representation() {
    for i in 0..=600 {
        let x = 0.1 * i as f64;
        for n in 0..4 {
            let got = bessel_j(n, x).unwrap();
            assert!((got - bessel_ref(n, x)).abs() < 1e-13, "J_{n}({x})");
        }
    }
}

#[test]
fn large_argument_form() {
    for i in 0..=150 {
        let x = 50.0 + i as f64;
        for n in 0..2u32 {
            let lead = (2.0 / (std::f64::consts::PI * x)).sqrt()
                * (x - n as f64 * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4).cos();
            assert!((bessel_j(n, x).unwrap() - lead).abs() < 0.5 * x.powf(-1.5));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn j0sq_identity(a in 0.0f64..49.0, w in 0.01f64..50.0) {
        let b = (a + w).min(50.0);
        let got = integral_j0sq(a, b, &Quadrature::default()).unwrap();
        let want = integrate_ref(|x| bessel_ref(0, x).powi(2), a, b, 0.5);
        prop_assert!((got - want).abs() < 1e-7 * want.abs().max(1e-3));
    }

    #[test]
    fn log_j0sq_identity(a in 0.05f64..49.0, w in 0.01f64..50.0) {
        let b = (a + w).min(50.0);
        let got = integral_log_j0sq(a, b, &Quadrature::default()).unwrap();
        let want = integrate_ref(|x| x.ln() * bessel_ref(0, x).powi(2), a, b, 0.5);
        prop_assert!((got - want).abs() < 1e-7);
    }
}

fn band() -> BandLimits {
    BandLimits::from_wavelengths(0.5, 0.3, 10).unwrap()
}

const RADII: [f64; 5] = [0.01, 0.05, 0.1, 0.3, 1.0];

fn weighted_ref(xi: impl Fn(f64) -> f64, r: f64, b: &BandLimits) -> f64 {
    integrate_ref(
        |w| xi(w) * bessel_ref(0, w * r).powi(2),
        b.omega_min,
        b.omega_max,
        0.25,
    ) * b.count as f64
        / b.width()
}

#[test]
fn closed_forms_match_brute_force() {
    let b = band();
    let q = Quadrature::default();
    let y = ScattererSet::new(vec![Vec2::new(0.0, 0.0)]).unwrap();
    for r in RADII {
        let z = Vec2::new(0.6 * r, 0.8 * r);
        let mf = analytic_mf(z, &y, &b, &q).unwrap();
        assert!(rel_err(mf, weighted_ref(|_| 1.0, r, &b)) < 1e-6, "MF r={r}");
        for n in 0..4u32 {
            let v = analytic_wmf(z, &y, &b, n, &q).unwrap();
            assert!(
                rel_err(v, weighted_ref(|w| w.powi(n as i32), r, &b)) < 1e-6,
                "WMF({n}) r={r}"
            );
        }
        let lg = analytic_log(z, &y, &b, &q).unwrap();
        assert!(
            rel_err(lg, weighted_ref(f64::ln, r, &b)) < 1e-6,
            "LOG r={r}"
        );
    }
}

#[test]
fn bracket_derivative_identities() {
    // d/dw [w^{n+1} Lambda(w r)] = (n+1) w^n Lambda - 2 w^n J1^2, checked by central differences.
    let r = 0.37;
    let lam = |w: f64| j0(w * r).powi(2) + j1(w * r).powi(2);
    for n in 0..3i32 {
        for w in [13.0, 15.5, 19.0] {
            let g = |w: f64| w.powi(n + 1) * lam(w);
            let h = 1e-5;
            let fd = (g(w + h) - g(w - h)) / (2.0 * h);
            let exact = (n + 1) as f64 * w.powi(n) * lam(w) - 2.0 * w.powi(n) * j1(w * r).powi(2);
            assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0));
        }
    }
}
