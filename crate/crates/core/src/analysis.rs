//! Closed-form Bessel predictions of the imaging maps.
//!
//! For scatterers `y_m` and `r_m = |z - y_m|`, a large, well-spread direction
//! set gives `W_SF(z; w) ~ sum_m J0(w r_m)^2`, and the multi-frequency maps
//! approach `F / (w_F - w_1) * int xi(w) J0(w r_m)^2 dw`. With
//! `Lambda(x) = J0(x)^2 + J1(x)^2` the integrals reduce to boundary terms in
//! `Lambda` plus a remainder in `J1^2`:
//!
//! ```text
//! int w^n J0^2   = [w^{n+1} Lambda] / (n+1) + (1-n)/(n+1) int w^n J1^2
//! int ln(w) J0^2 = [w ln(w) Lambda] - int (J0^2 - (ln w - 1) J1^2)
//! ```
//!
//! Remainders are evaluated with adaptive quadrature.

use std::io::Write;

use crate::error::{Error, Result};
use crate::forward::FrequencySet;
use crate::geometry::{CurveSample, Vec2};
use crate::specfun::{bessel_envelope, j0, j1, Quadrature};

/// Point scatterers `y_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScattererSet {
    points: Vec<Vec2>,
}

impl ScattererSet {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("scatterer set is empty"));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::domain("scatterer coordinates must be finite"));
        }
        Ok(ScattererSet { points })
    }

    pub fn from_samples(samples: &[CurveSample]) -> Result<Self> {
        Self::new(samples.iter().map(|s| s.point).collect())
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn distances(&self, z: Vec2) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(move |p| z.distance(*p))
    }
}

/// Frequency band `[w_1, w_F]` sampled by `F` frequencies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandLimits {
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
}

impl BandLimits {
    pub fn new(omega_min: f64, omega_max: f64, count: usize) -> Result<Self> {
        let b = BandLimits {
            omega_min,
            omega_max,
            count,
        };
        b.validate()?;
        Ok(b)
    }

    /// Band from wavelength limits, `w = 2 pi / lambda`.
    pub fn from_wavelengths(lambda_max: f64, lambda_min: f64, count: usize) -> Result<Self> {
        if !(lambda_min > 0.0) || !(lambda_max > 0.0) {
            return Err(Error::domain("wavelengths must be positive"));
        }
        let tau = std::f64::consts::TAU;
        Self::new(tau / lambda_max, tau / lambda_min, count)
    }

    pub fn from_frequencies(f: &FrequencySet) -> Result<Self> {
        let w = f.omegas();
        let lo = w.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = w.iter().copied().fold(0.0, f64::max);
        Self::new(lo, hi, w.len())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0)
            || !(self.omega_min < self.omega_max)
            || !self.omega_max.is_finite()
        {
            return Err(Error::domain(format!(
                "band needs 0 < omega_1 < omega_F, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if self.count < 2 {
            return Err(Error::domain("band needs at least 2 frequencies"));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.omega_max - self.omega_min
    }
}

/// `Lambda(x) = J0(x)^2 + J1(x)^2`.
pub fn lambda_envelope(x: f64) -> f64 {
    bessel_envelope(x)
}

/// `sum_m J0(w r_m)^2`.
pub fn analytic_sf(z: Vec2, scat: &ScattererSet, omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!(
            "omega must be positive, got {omega}"
        )));
    }
    Ok(scat.distances(z).map(|r| j0(omega * r).powi(2)).sum())
}

/// Unweighted multi-frequency prediction
/// `F / (w_F - w_1) * sum_m { w_F Lambda(w_F r) - w_1 Lambda(w_1 r) + int J1(w r)^2 dw }`.
pub fn analytic_mf(z: Vec2, scat: &ScattererSet, band: &BandLimits, q: &Quadrature) -> Result<f64> {
    band.validate()?;
    let (a, b) = (band.omega_min, band.omega_max);
    let mut total = 0.0;
    for r in scat.distances(z) {
        let rem = q.integrate(|w| j1(w * r).powi(2), a, b)?;
        total += b * lambda_envelope(b * r) - a * lambda_envelope(a * r) + rem;
    }
    Ok(band.count as f64 / band.width() * total)
}

/// The `J1^2` remainder of the `w^n` weighted map at distance `r`:
/// `(1 - n) / ((n + 1)(w_F - w_1)) * int w^n J1(w r)^2 dw`. Zero for `n = 1`.
pub fn wmf_remainder(r: f64, band: &BandLimits, n: u32, q: &Quadrature) -> Result<f64> {
    band.validate()?;
    if n == 1 {
        return Ok(0.0);
    }
    let k = n as i32;
    let int = q.integrate(
        |w| w.powi(k) * j1(w * r).powi(2),
        band.omega_min,
        band.omega_max,
    )?;
    Ok((1.0 - n as f64) / ((n as f64 + 1.0) * band.width()) * int)
}

/// Prediction for the `w^n` weighted map:
/// `F / (n + 1) * sum_m (w_F^{n+1} Lambda_F - w_1^{n+1} Lambda_1) / (w_F - w_1) + F sum_m D_m`.
pub fn analytic_wmf(
    z: Vec2,
    scat: &ScattererSet,
    band: &BandLimits,
    n: u32,
    q: &Quadrature,
) -> Result<f64> {
    band.validate()?;
    let (a, b) = (band.omega_min, band.omega_max);
    let p = n as i32 + 1;
    let f = band.count as f64;
    let mut boundary = 0.0;
    let mut rem = 0.0;
    for r in scat.distances(z) {
        boundary += b.powi(p) * lambda_envelope(b * r) - a.powi(p) * lambda_envelope(a * r);
        rem += wmf_remainder(r, band, n, q)?;
    }
    Ok(f / p as f64 * boundary / band.width() + f * rem)
}

/// Prediction for the `ln w` weighted map:
/// `F / (w_F - w_1) * sum_m { w_F ln w_F Lambda_F - w_1 ln w_1 Lambda_1 - int (J0^2 - (ln w - 1) J1^2) dw }`.
pub fn analytic_log(
    z: Vec2,
    scat: &ScattererSet,
    band: &BandLimits,
    q: &Quadrature,
) -> Result<f64> {
    band.validate()?;
    let (a, b) = (band.omega_min, band.omega_max);
    if a <= 1.0 {
        return Err(Error::domain(format!(
            "log weighting needs omega_1 > 1, got {a}"
        )));
    }
    let mut total = 0.0;
    for r in scat.distances(z) {
        let (e1, e2) = e_terms(r, band, q)?;
        total +=
            b * b.ln() * lambda_envelope(b * r) - a * a.ln() * lambda_envelope(a * r) - e1 + e2;
    }
    Ok(band.count as f64 / band.width() * total)
}

fn e_terms(r: f64, band: &BandLimits, q: &Quadrature) -> Result<(f64, f64)> {
    let (a, b) = (band.omega_min, band.omega_max);
    let e1 = q.integrate(|w| j0(w * r).powi(2), a, b)?;
    let e2 = q.integrate(|w| (w.ln() - 1.0) * j1(w * r).powi(2), a, b)?;
    Ok((e1, e2))
}

/// `E1 = int J0(w r)^2 dw` and `E2 = int (ln w - 1) J1(w r)^2 dw` over the band.
pub fn e1_e2(r: f64, band: &BandLimits, q: &Quadrature) -> Result<(f64, f64)> {
    band.validate()?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("r must be positive, got {r}")));
    }
    e_terms(r, band, q)
}

/// One row of an `E1`/`E2` sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ESample {
    pub r: f64,
    pub e1: f64,
    pub e2: f64,
}

impl ESample {
    pub fn balance(&self) -> f64 {
        -self.e1 + self.e2
    }
}

pub fn e_sweep(radii: &[f64], band: &BandLimits, q: &Quadrature) -> Result<Vec<ESample>> {
    radii
        .iter()
        .map(|&r| e1_e2(r, band, q).map(|(e1, e2)| ESample { r, e1, e2 }))
        .collect()
}

/// CSV with columns `r,E1,E2,balance` where `balance = -E1 + E2`.
pub fn write_e_sweep_csv<W: Write>(rows: &[ESample], mut w: W) -> Result<()> {
    writeln!(w, "# submig-esweep v1")?;
    writeln!(w, "r,E1,E2,balance")?;
    for s in rows {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            s.r,
            s.e1,
            s.e2,
            s.balance()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn band() -> BandLimits {
        BandLimits::from_wavelengths(0.5, 0.3, 10).unwrap()
    }

    fn q() -> Quadrature {
        Quadrature::new(1e-12, 1e-12, 50).unwrap()
    }

    fn one(p: Vec2) -> ScattererSet {
        ScattererSet::new(vec![p]).unwrap()
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1e-300)
    }

    const J0_ZERO: f64 = 2.404825557695773;

    #[test]
    fn sf_examples() {
        let y = Vec2::new(0.2, -0.1);
        assert_eq!(analytic_sf(y, &one(y), 12.0).unwrap(), 1.0);
        let z = y + Vec2::new(J0_ZERO / 12.0, 0.0);
        assert!(analytic_sf(z, &one(y), 12.0).unwrap().abs() < 1e-10);
        let two = ScattererSet::new(vec![Vec2::new(-0.3, 0.0), Vec2::new(0.3, 0.0)]).unwrap();
        let z = Vec2::new(0.0, 0.4);
        let single = analytic_sf(z, &one(Vec2::new(0.3, 0.0)), 9.0).unwrap();
        assert!((analytic_sf(z, &two, 9.0).unwrap() - 2.0 * single).abs() < 1e-15);
        assert!(analytic_sf(z, &two, 0.0).is_err());
    }

    #[test]
    fn bad_inputs() {
        assert!(ScattererSet::new(vec![]).is_err());
        assert!(ScattererSet::new(vec![Vec2::new(f64::NAN, 0.0)]).is_err());
        assert!(BandLimits::new(5.0, 4.0, 10).is_err());
        assert!(BandLimits::new(4.0, 5.0, 1).is_err());
        let low = BandLimits::new(0.5, 5.0, 4).unwrap();
        assert!(matches!(
            analytic_log(Vec2::default(), &one(Vec2::default()), &low, &q()),
            Err(Error::Domain(_))
        ));
        assert!(e1_e2(0.0, &band(), &q()).is_err());
    }

    #[test]
    fn mf_at_scatterer_is_f() {
        let y = Vec2::new(0.1, 0.1);
        assert!((analytic_mf(y, &one(y), &band(), &q()).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn mf_far_field_decays() {
        let b = band();
        let r = 101.0 / b.omega_min;
        let v = analytic_mf(Vec2::new(r, 0.0), &one(Vec2::default()), &b, &q()).unwrap();
        assert!(v < 0.05 * 10.0, "{v}");
    }

    #[test]
    fn mf_matches_direct_integral() {
        let b = band();
        let r = 0.1;
        let direct = q()
            .integrate(|w| j0(w * r).powi(2), b.omega_min, b.omega_max)
            .unwrap()
            * 10.0
            / b.width();
        let v = analytic_mf(Vec2::new(0.0, r), &one(Vec2::default()), &b, &q()).unwrap();
        assert!(close(v, direct, 1e-6), "{v} vs {direct}");
    }

    #[test]
    fn wmf_reduces_to_mf_at_order_zero() {
        let b = band();
        let s = ScattererSet::new(vec![Vec2::new(0.0, 0.0), Vec2::new(0.2, 0.1)]).unwrap();
        let z = Vec2::new(0.05, 0.3);
        let mf = analytic_mf(z, &s, &b, &q()).unwrap();
        let w0 = analytic_wmf(z, &s, &b, 0, &q()).unwrap();
        assert!(close(w0, mf, 1e-12), "{w0} vs {mf}");
    }

    #[test]
    fn wmf_at_scatterer() {
        let b = band();
        let y = Vec2::new(-0.4, 0.2);
        let v = analytic_wmf(y, &one(y), &b, 1, &q()).unwrap();
        assert!(close(v, 10.0 * (b.omega_max + b.omega_min) / 2.0, 1e-14));
    }

    #[test]
    fn wmf_matches_direct_integral() {
        let b = band();
        for n in 0..4 {
            for r in [0.01, 0.05, 0.1, 0.3, 1.0] {
                let k = n as i32;
                let direct = q()
                    .integrate(|w| w.powi(k) * j0(w * r).powi(2), b.omega_min, b.omega_max)
                    .unwrap()
                    * 10.0
                    / b.width();
                let v =
                    analytic_wmf(Vec2::new(r, 0.0), &one(Vec2::default()), &b, n, &q()).unwrap();
                assert!(close(v, direct, 1e-6), "n={n} r={r}: {v} vs {direct}");
            }
        }
    }

    #[test]
    fn log_at_scatterer() {
        let b = band();
        let (a, w) = (b.omega_min, b.omega_max);
        let want = 10.0 / b.width() * (w * w.ln() - a * a.ln() - (w - a));
        let y = Vec2::new(0.3, 0.3);
        assert!(close(
            analytic_log(y, &one(y), &b, &q()).unwrap(),
            want,
            1e-12
        ));
    }

    #[test]
    fn log_matches_direct_integral_and_decays() {
        let b = band();
        for r in [0.01, 0.05, 0.1, 0.3, 1.0] {
            let direct = q()
                .integrate(|w| w.ln() * j0(w * r).powi(2), b.omega_min, b.omega_max)
                .unwrap()
                * 10.0
                / b.width();
            let v = analytic_log(Vec2::new(0.0, r), &one(Vec2::default()), &b, &q()).unwrap();
            assert!(close(v, direct, 1e-6), "r={r}: {v} vs {direct}");
        }
        let near = analytic_log(Vec2::new(0.1, 0.0), &one(Vec2::default()), &b, &q()).unwrap();
        let far = analytic_log(Vec2::new(0.5, 0.0), &one(Vec2::default()), &b, &q()).unwrap();
        assert!(near > 0.0 && near > far);
    }

    #[test]
    fn e_terms_limits() {
        let b = band();
        let (e1, e2) = e1_e2(1e-4, &b, &q()).unwrap();
        assert!((e1 - b.width()).abs() < 1e-3);
        assert!(e2.abs() < 1e-4);
        let (e1, e2) = e1_e2(0.05, &b, &q()).unwrap();
        assert!(e1 > e2);
        let (e1, e2) = e1_e2(10.0, &b, &q()).unwrap();
        assert!(e1.abs() < 0.1 * b.width() && e2.abs() < 0.1 * b.width());
    }

    #[test]
    fn balance_negative_near_scatterer() {
        let b = band();
        let r0 = 2f64.sqrt() / b.omega_max;
        let radii: Vec<f64> = (1..=40).map(|i| r0 * i as f64 / 40.0).collect();
        for s in e_sweep(&radii, &b, &q()).unwrap() {
            assert!(s.balance() < 0.0, "r={} balance={}", s.r, s.balance());
        }
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = [ESample {
            r: 0.5,
            e1: 2.0,
            e2: 0.25,
        }];
        let mut buf = Vec::new();
        write_e_sweep_csv(&rows, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "# submig-esweep v1\nr,E1,E2,balance\n\
             5.0000000000000000e-1,2.0000000000000000e0,2.5000000000000000e-1,-1.7500000000000000e0\n"
        );
    }

    #[test]
    fn band_from_frequency_set() {
        let f = FrequencySet::equispaced(0.5, 0.3, 10).unwrap();
        let b = BandLimits::from_frequencies(&f).unwrap();
        assert!((b.omega_min - TAU / 0.5).abs() < 1e-12);
        assert!((b.omega_max - TAU / 0.3).abs() < 1e-12);
        assert_eq!(b.count, 10);
    }
}
