//! Supporting curves of thin inclusions and their arclength sampling.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::specfun::{quad_adaptive, Quadrature};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise rotation by a right angle.
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    #[inline]
    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A regular parametric curve `s -> position(s)` on `[s_min, s_max]`.
pub trait ParametricCurve: Send + Sync + fmt::Debug {
    fn position(&self, s: f64) -> Vec2;
    fn derivative(&self, s: f64) -> Vec2;
    fn param_range(&self) -> (f64, f64);

    /// Text form used in configuration snapshots.
    fn describe(&self) -> String {
        format!("{self:?}")
    }
}

/// Curve whose coordinates are polynomials in the parameter. Coefficients are
/// stored in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialCurve {
    x: Vec<f64>,
    y: Vec<f64>,
    s_min: f64,
    s_max: f64,
    name: Option<String>,
}

impl PolynomialCurve {
    pub fn new(x: Vec<f64>, y: Vec<f64>, s_min: f64, s_max: f64) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::domain(
                "polynomial curve needs at least one coefficient per axis",
            ));
        }
        if !(s_min < s_max) || !s_min.is_finite() || !s_max.is_finite() {
            return Err(Error::domain(format!(
                "invalid parameter range [{s_min}, {s_max}]"
            )));
        }
        if x.iter().chain(&y).any(|c| !c.is_finite()) {
            return Err(Error::domain("polynomial coefficients must be finite"));
        }
        let curve = PolynomialCurve {
            x,
            y,
            s_min,
            s_max,
            name: None,
        };
        // Regularity is checked on a fine sweep; a polynomial derivative
        // cannot vanish between samples without nearly vanishing at one.
        let steps = 2048;
        for i in 0..=steps {
            let s = s_min + (s_max - s_min) * i as f64 / steps as f64;
            if curve.derivative(s).norm() < 1e-9 {
                return Err(Error::domain(format!("curve is not regular at s = {s}")));
            }
        }
        Ok(curve)
    }

    fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn x_coeffs(&self) -> &[f64] {
        &self.x
    }

    pub fn y_coeffs(&self) -> &[f64] {
        &self.y
    }
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * s + k)
}

fn horner_derivative(c: &[f64], s: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &ck)| acc * s + k as f64 * ck)
}

impl ParametricCurve for PolynomialCurve {
    fn position(&self, s: f64) -> Vec2 {
        Vec2::new(horner(&self.x, s), horner(&self.y, s))
    }

    fn derivative(&self, s: f64) -> Vec2 {
        Vec2::new(horner_derivative(&self.x, s), horner_derivative(&self.y, s))
    }

    fn param_range(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }

    fn describe(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let join = |c: &[f64]| {
            c.iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "poly[x: {}; y: {}; s: {} {}]",
            join(&self.x),
            join(&self.y),
            self.s_min,
            self.s_max
        )
    }
}

type CurveFn = Box<dyn Fn(f64) -> Vec2 + Send + Sync>;

/// Curve given by closures for position and derivative.
pub struct FnCurve {
    position: CurveFn,
    derivative: CurveFn,
    s_min: f64,
    s_max: f64,
    label: String,
}

impl FnCurve {
    pub fn new(
        label: impl Into<String>,
        s_min: f64,
        s_max: f64,
        position: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> Vec2 + Send + Sync + 'static,
    ) -> Self {
        FnCurve {
            position: Box::new(position),
            derivative: Box::new(derivative),
            s_min,
            s_max,
            label: label.into(),
        }
    }
}

impl fmt::Debug for FnCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FnCurve({}, [{}, {}])",
            self.label, self.s_min, self.s_max
        )
    }
}

impl ParametricCurve for FnCurve {
    fn position(&self, s: f64) -> Vec2 {
        (self.position)(s)
    }
    fn derivative(&self, s: f64) -> Vec2 {
        (self.derivative)(s)
    }
    fn param_range(&self) -> (f64, f64) {
        (self.s_min, self.s_max)
    }
    fn describe(&self) -> String {
        self.label.clone()
    }
}

/// `sigma1 = {(s - 0.2, -0.5 s^2 + 0.5) : -0.5 <= s <= 0.5}`.
pub fn sigma1() -> PolynomialCurve {
    PolynomialCurve::new(vec![-0.2, 1.0], vec![0.5, 0.0, -0.5], -0.5, 0.5)
        .expect("sigma1 is regular")
        .named("sigma1")
}

/// `sigma2 = {(s + 0.2, s^3 + s^2 - 0.6) : -0.5 <= s <= 0.5}`.
pub fn sigma2() -> PolynomialCurve {
    PolynomialCurve::new(vec![0.2, 1.0], vec![-0.6, 0.0, 1.0, 1.0], -0.5, 0.5)
        .expect("sigma2 is regular")
        .named("sigma2")
}

/// Resolves a built-in curve name.
pub fn catalog_curve(name: &str) -> Result<Arc<dyn ParametricCurve>> {
    match name {
        "sigma1" => Ok(Arc::new(sigma1())),
        "sigma2" => Ok(Arc::new(sigma2())),
        other => Err(Error::config(format!(
            "unknown curve '{other}' (known: sigma1, sigma2)"
        ))),
    }
}

/// A thin tubular inclusion of half-thickness `h` around a supporting curve.
#[derive(Clone, Debug)]
pub struct ThinInclusion {
    pub curve: Arc<dyn ParametricCurve>,
    pub half_thickness: f64,
    pub permittivity: f64,
    pub permeability: f64,
    pub background_permittivity: f64,
    pub background_permeability: f64,
}

impl ThinInclusion {
    /// Inclusion in a unit background (`eps0 = mu0 = 1`).
    pub fn new(curve: Arc<dyn ParametricCurve>, h: f64, eps: f64, mu: f64) -> Result<Self> {
        Self::with_background(curve, h, eps, mu, 1.0, 1.0)
    }

    pub fn with_background(
        curve: Arc<dyn ParametricCurve>,
        h: f64,
        eps: f64,
        mu: f64,
        eps0: f64,
        mu0: f64,
    ) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::domain(format!(
                "half-thickness must be positive, got {h}"
            )));
        }
        if !(eps0 > 0.0) || !(mu0 > 0.0) || !eps0.is_finite() || !mu0.is_finite() {
            return Err(Error::domain("background parameters must be positive"));
        }
        // Equality is allowed: a zero-contrast inclusion is a valid (silent) scatterer.
        if !(eps >= eps0) || !(mu >= mu0) || !eps.is_finite() || !mu.is_finite() {
            return Err(Error::domain(format!(
                "inclusion parameters must not fall below the background (eps={eps}, mu={mu})"
            )));
        }
        Ok(ThinInclusion {
            curve,
            half_thickness: h,
            permittivity: eps,
            permeability: mu,
            background_permittivity: eps0,
            background_permeability: mu0,
        })
    }

    pub fn has_contrast(&self) -> bool {
        self.permittivity != self.background_permittivity
            || self.permeability != self.background_permeability
    }
}

/// One representative point of a curve segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub point: Vec2,
    pub tangent: Vec2,
    pub normal: Vec2,
    /// Arclength share `|sigma| / M`.
    pub weight: f64,
    /// Curve parameter of the point.
    pub param: f64,
}

/// Length of the curve.
pub fn curve_length(curve: &dyn ParametricCurve, q: &Quadrature) -> Result<f64> {
    let (a, b) = curve.param_range();
    quad_adaptive(|s| curve.derivative(s).norm(), a, b, q)
}

/// Unit tangent and left normal at parameter `s`.
pub fn frames(curve: &dyn ParametricCurve, s: f64) -> Result<(Vec2, Vec2)> {
    let (a, b) = curve.param_range();
    let slack = 1e-12 * (b - a);
    if !(s >= a - slack && s <= b + slack) {
        return Err(Error::domain(format!("parameter {s} outside [{a}, {b}]")));
    }
    let d = curve.derivative(s);
    let len = d.norm();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::domain(format!("curve is not regular at s = {s}")));
    }
    let t = d * (1.0 / len);
    Ok((t, t.perp()))
}

/// Number of segments of length at most `wavelength / 2`: `ceil(2 |sigma| / lambda)`.
pub fn segment_count_for_length(length: f64, wavelength: f64) -> usize {
    let ratio = 2.0 * length / wavelength;
    // Absorb rounding so exact multiples are not bumped up by one.
    let m = (ratio - 1e-9 * ratio.max(1.0)).ceil();
    (m as usize).max(1)
}

pub fn effective_segment_count(
    curve: &dyn ParametricCurve,
    wavelength: f64,
    q: &Quadrature,
) -> Result<usize> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return Err(Error::domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    Ok(segment_count_for_length(
        curve_length(curve, q)?,
        wavelength,
    ))
}

/// Cumulative arclength on a dense parameter table, with inversion by bisection.
pub struct ArclengthTable<'a> {
    curve: &'a dyn ParametricCurve,
    params: Vec<f64>,
    cumulative: Vec<f64>,
    q: Quadrature,
}

const TABLE_PANELS: usize = 256;

impl<'a> ArclengthTable<'a> {
    pub fn new(curve: &'a dyn ParametricCurve, q: &Quadrature) -> Result<Self> {
        let (a, b) = curve.param_range();
        let mut params = Vec::with_capacity(TABLE_PANELS + 1);
        let mut cumulative = Vec::with_capacity(TABLE_PANELS + 1);
        params.push(a);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 1..=TABLE_PANELS {
            let lo = params[i - 1];
            let hi = if i == TABLE_PANELS {
                b
            } else {
                a + (b - a) * i as f64 / TABLE_PANELS as f64
            };
            acc += quad_adaptive(|s| curve.derivative(s).norm(), lo, hi, q)?;
            params.push(hi);
            cumulative.push(acc);
        }
        Ok(ArclengthTable {
            curve,
            params,
            cumulative,
            q: *q,
        })
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().expect("table is nonempty")
    }

    /// Arclength from the start of the curve to parameter `s`.
    pub fn arclength_at(&self, s: f64) -> Result<f64> {
        let i = match self.params.partition_point(|&p| p <= s) {
            0 => 0,
            k => (k - 1).min(TABLE_PANELS - 1),
        };
        let lo = self.params[i];
        let partial = quad_adaptive(|t| self.curve.derivative(t).norm(), lo, s.max(lo), &self.q)?;
        Ok(self.cumulative[i] + partial)
    }

    /// Parameter at which the arclength reaches `target`.
    pub fn param_at(&self, target: f64) -> Result<f64> {
        let total = self.total_length();
        if !(target >= 0.0 && target <= total) {
            return Err(Error::domain(format!(
                "arclength {target} outside [0, {total}]"
            )));
        }
        let i = self
            .cumulative
            .partition_point(|&c| c <= target)
            .clamp(1, TABLE_PANELS);
        let (mut lo, mut hi) = (self.params[i - 1], self.params[i]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let here = self.cumulative[i - 1]
                + quad_adaptive(
                    |t| self.curve.derivative(t).norm(),
                    self.params[i - 1],
                    mid,
                    &self.q,
                )?;
            if here < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        let s = 0.5 * (lo + hi);
        let residual = self.arclength_at(s)? - target;
        if residual.abs() > 1e-8 {
            return Err(Error::Convergence { estimate: s });
        }
        Ok(s)
    }
}

/// `M` samples at the arclength midpoints of `M` equal-arclength segments.
pub fn sample_curve(
    inclusion: &ThinInclusion,
    m: usize,
    q: &Quadrature,
) -> Result<Vec<CurveSample>> {
    if m == 0 {
        return Err(Error::domain("segment count must be at least 1"));
    }
    let curve = inclusion.curve.as_ref();
    let table = ArclengthTable::new(curve, q)?;
    let total = table.total_length();
    let weight = total / m as f64;
    (0..m)
        .map(|k| {
            let s = table.param_at((k as f64 + 0.5) * weight)?;
            let (tangent, normal) = frames(curve, s)?;
            Ok(CurveSample {
                point: curve.position(s),
                tangent,
                normal,
                weight,
                param: s,
            })
        })
        .collect()
}

/// Dense polyline approximation used for point-to-curve distances.
#[derive(Clone, Debug)]
pub struct Polyline {
    vertices: Vec<Vec2>,
}

impl Polyline {
    pub fn from_curve(curve: &dyn ParametricCurve, segments: usize) -> Self {
        let (a, b) = curve.param_range();
        let segments = segments.max(1);
        let vertices = (0..=segments)
            .map(|i| curve.position(a + (b - a) * i as f64 / segments as f64))
            .collect();
        Polyline { vertices }
    }

    pub fn distance(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for w in self.vertices.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ab = b - a;
            let len2 = ab.dot(ab);
            let t = if len2 > 0.0 {
                ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min(p.distance(a + ab * t));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Quadrature {
        Quadrature::default()
    }

    fn unit_segment() -> Arc<dyn ParametricCurve> {
        Arc::new(PolynomialCurve::new(vec![0.0, 1.0], vec![0.0], 0.0, 1.0).unwrap())
    }

    fn sigma1_length_exact() -> f64 {
        let f = |s: f64| s * (1.0 + s * s).sqrt() / 2.0 + s.asinh() / 2.0;
        f(0.5) - f(-0.5)
    }

    #[test]
    fn lengths() {
        assert!((curve_length(unit_segment().as_ref(), &q()).unwrap() - 1.0).abs() < 1e-14);
        assert!((curve_length(&sigma1(), &q()).unwrap() - sigma1_length_exact()).abs() < 1e-9);
        let arc = FnCurve::new(
            "arc",
            0.0,
            std::f64::consts::PI,
            |s| Vec2::new(s.cos(), s.sin()),
            |s| Vec2::new(-s.sin(), s.cos()),
        );
        assert!((curve_length(&arc, &q()).unwrap() - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn frames_examples() {
        let (t, n) = frames(unit_segment().as_ref(), 0.0).unwrap();
        assert_eq!((t, n), (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)));

        let r = 1.04f64.sqrt();
        let (t, n) = frames(&sigma1(), 0.2).unwrap();
        assert!((t - Vec2::new(1.0 / r, -0.2 / r)).norm() < 1e-15);
        assert!((n - Vec2::new(0.2 / r, 1.0 / r)).norm() < 1e-15);

        let (t, n) = frames(&sigma2(), 0.0).unwrap();
        assert!((t - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        assert!((n - Vec2::new(0.0, 1.0)).norm() < 1e-15);

        assert!(matches!(frames(&sigma1(), 0.6), Err(Error::Domain(_))));
    }

    #[test]
    fn segment_counts() {
        assert_eq!(segment_count_for_length(1.0, 0.5), 4);
        assert_eq!(segment_count_for_length(1.0, 0.3), 7);
        assert_eq!(segment_count_for_length(1.0, 0.4), 5);
        assert_eq!(segment_count_for_length(1.09, 0.5), 5);
        assert_eq!(effective_segment_count(&sigma1(), 0.5, &q()).unwrap(), 5);
        // |sigma1| = 1.0400, 2|sigma1|/0.3 = 6.93
        assert_eq!(effective_segment_count(&sigma1(), 0.3, &q()).unwrap(), 7);
        assert!(effective_segment_count(&sigma1(), 0.0, &q()).is_err());
    }

    #[test]
    fn samples_on_straight_segment() {
        let inc = ThinInclusion::new(unit_segment(), 0.01, 2.0, 2.0).unwrap();
        let one = sample_curve(&inc, 1, &q()).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].point - Vec2::new(0.5, 0.0)).norm() < 1e-12);
        assert!((one[0].weight - 1.0).abs() < 1e-14);

        let two = sample_curve(&inc, 2, &q()).unwrap();
        assert!((two[0].point.x - 0.25).abs() < 1e-12);
        assert!((two[1].point.x - 0.75).abs() < 1e-12);
        assert!(two.iter().all(|s| (s.weight - 0.5).abs() < 1e-14));
        assert!(sample_curve(&inc, 0, &q()).is_err());
    }

    #[test]
    fn sigma1_samples_are_equally_spaced_in_arclength() {
        let inc = ThinInclusion::new(Arc::new(sigma1()), 0.015, 5.0, 5.0).unwrap();
        let samples = sample_curve(&inc, 5, &q()).unwrap();
        // Oracle: trapezoid cumulative arclength on a very fine grid.
        let n = 200_000;
        let arclen = |s_end: f64| {
            let h = (s_end + 0.5) / n as f64;
            let f = |s: f64| (1.0 + s * s).sqrt();
            (0..n)
                .map(|i| {
                    let s0 = -0.5 + i as f64 * h;
                    0.5 * h * (f(s0) + f(s0 + h))
                })
                .sum::<f64>()
        };
        let positions: Vec<f64> = samples.iter().map(|s| arclen(s.param)).collect();
        let gaps: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
        for g in &gaps {
            assert!((g - gaps[0]).abs() < 1e-6);
        }
        let total: f64 = samples.iter().map(|s| s.weight).sum();
        assert!((total - sigma1_length_exact()).abs() < 1e-9);
        for s in &samples {
            assert!((s.tangent.norm() - 1.0).abs() < 1e-12);
            assert!((s.normal.norm() - 1.0).abs() < 1e-12);
            assert!(s.tangent.dot(s.normal).abs() < 1e-12);
            assert!(s.point.distance(sigma1().position(s.param)) < 1e-9);
        }
    }

    #[test]
    fn inclusion_validation() {
        let c = unit_segment();
        assert!(ThinInclusion::new(c.clone(), 0.0, 5.0, 5.0).is_err());
        assert!(ThinInclusion::new(c.clone(), 0.01, 0.5, 5.0).is_err());
        assert!(ThinInclusion::new(c.clone(), 0.01, 5.0, 0.9).is_err());
        assert!(!ThinInclusion::new(c.clone(), 0.01, 1.0, 1.0)
            .unwrap()
            .has_contrast());
        assert!(ThinInclusion::new(c, 0.01, 5.0, 5.0)
            .unwrap()
            .has_contrast());
    }

    #[test]
    fn irregular_polynomial_rejected() {
        // (s^2, s^3) has a cusp at s = 0.
        assert!(
            PolynomialCurve::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.0, 0.0, 1.0], -1.0, 1.0).is_err()
        );
    }

    #[test]
    fn polyline_distance() {
        let p = Polyline::from_curve(unit_segment().as_ref(), 10);
        assert!((p.distance(Vec2::new(0.5, 0.3)) - 0.3).abs() < 1e-14);
        assert!((p.distance(Vec2::new(-0.3, -0.4)) - 0.5).abs() < 1e-14);
    }
}
