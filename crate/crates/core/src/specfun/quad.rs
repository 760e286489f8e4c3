use crate::error::{Error, Result};

/// The interval is first cut into this many equal panels so that the initial
/// Simpson samples cannot all land on zeros of an oscillatory integrand.
const INITIAL_PANELS: usize = 16;

/// Tolerances for adaptive Simpson quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_depth: 40,
        }
    }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64, max_depth: u32) -> Result<Self> {
        let q = Quadrature {
            abs_tol,
            rel_tol,
            max_depth,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_depth < 10 {
            return Err(Error::domain("quadrature max_depth must be at least 10"));
        }
        Ok(())
    }

    /// Shorthand for [`quad_adaptive`] with these tolerances.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        quad_adaptive(f, a, b, self)
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Converges when the Richardson-corrected estimate is within
/// `max(abs_tol, rel_tol * |I|)` of the true integral for smooth integrands.
/// A branch that reaches `max_depth` without meeting its local tolerance
/// makes the whole call return [`Error::Convergence`] with the best estimate.
pub fn quad_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: &Quadrature) -> Result<f64> {
    q.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("quadrature limits must be finite"));
    }
    if a > b {
        return Err(Error::domain(format!(
            "quadrature requires a <= b, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }

    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut coarse = 0.0;
    let mut fa = f(a);
    for i in 0..INITIAL_PANELS {
        let lo = a + width * i as f64;
        let hi = if i + 1 == INITIAL_PANELS {
            b
        } else {
            lo + width
        };
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        let fb = f(hi);
        let s = simpson(lo, hi, fa, fm, fb);
        coarse += s;
        panels.push(Panel {
            lo,
            hi,
            fa,
            fm,
            fb,
            whole: s,
        });
        fa = fb;
    }
    if !coarse.is_finite() {
        return Err(Error::domain("integrand is not finite on the interval"));
    }

    let tol = q.abs_tol.max(q.rel_tol * coarse.abs());
    let mut failed = false;
    let mut total = 0.0;
    for p in &panels {
        let eps = tol * (p.hi - p.lo) / (b - a);
        total += refine(&f, p, eps, 0, q.max_depth, &mut failed);
    }
    if failed || !total.is_finite() {
        return Err(Error::Convergence { estimate: total });
    }
    Ok(total)
}

struct Panel {
    lo: f64,
    hi: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    p: &Panel,
    eps: f64,
    depth: u32,
    max_depth: u32,
    failed: &mut bool,
) -> f64 {
    let mid = 0.5 * (p.lo + p.hi);
    let lm = 0.5 * (p.lo + mid);
    let rm = 0.5 * (mid + p.hi);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(p.lo, mid, p.fa, flm, p.fm);
    let right = simpson(mid, p.hi, p.fm, frm, p.fb);
    let delta = left + right - p.whole;
    if delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    if depth >= max_depth || !(lm > p.lo && rm < p.hi) || !delta.is_finite() {
        *failed = true;
        return left + right + delta / 15.0;
    }
    let lp = Panel {
        lo: p.lo,
        hi: mid,
        fa: p.fa,
        fm: flm,
        fb: p.fm,
        whole: left,
    };
    let rp = Panel {
        lo: mid,
        hi: p.hi,
        fa: p.fm,
        fm: frm,
        fb: p.fb,
        whole: right,
    };
    refine(f, &lp, 0.5 * eps, depth + 1, max_depth, failed)
        + refine(f, &rp, 0.5 * eps, depth + 1, max_depth, failed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_integrand() {
        let v = quad_adaptive(|_| 1.0, 0.0, 2.0, &Quadrature::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sine_over_half_period() {
        let v = quad_adaptive(f64::sin, 0.0, PI, &Quadrature::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(
            quad_adaptive(f64::exp, 1.5, 1.5, &Quadrature::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn reversed_limits_rejected() {
        assert!(matches!(
            quad_adaptive(f64::exp, 2.0, 1.0, &Quadrature::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn invalid_tolerances_rejected() {
        assert!(Quadrature::new(0.0, 1e-10, 40).is_err());
        assert!(Quadrature::new(1e-10, -1.0, 40).is_err());
        assert!(Quadrature::new(1e-10, 1e-10, 5).is_err());
    }

    #[test]
    fn depth_exhaustion_reports_estimate() {
        // sqrt(x) has an unbounded derivative at 0; a shallow cap cannot meet 1e-15.
        let q = Quadrature::new(1e-15, 1e-15, 10).unwrap();
        match quad_adaptive(f64::sqrt, 0.0, 1.0, &q) {
            Err(Error::Convergence { estimate }) => assert!((estimate - 2.0 / 3.0).abs() < 1e-5),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn oscillatory_integrand() {
        // int_0^{20 pi} sin(x)^2 dx = 10 pi
        let v = quad_adaptive(
            |x: f64| x.sin().powi(2),
            0.0,
            20.0 * PI,
            &Quadrature::default(),
        )
        .unwrap();
        assert!((v - 10.0 * PI).abs() < 1e-9);
    }
}
