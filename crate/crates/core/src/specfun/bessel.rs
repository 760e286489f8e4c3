use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Arguments at or above this value use the Hankel asymptotic expansion;
/// below it the power series is summed in double-double arithmetic.
pub const ASYMPTOTIC_THRESHOLD: f64 = 16.0;

const MIN_ASYMPTOTIC_TERMS: usize = 6;

/// Bessel function of the first kind of integer order `n`, for `x >= 0`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel_j: non-finite argument {x}")));
    }
    if x < 0.0 {
        return Err(Error::domain(format!("bessel_j: negative argument {x}")));
    }
    Ok(eval(n, x))
}

/// `J_0(x)` for finite `x >= 0`.
#[inline]
pub fn j0(x: f64) -> f64 {
    debug_assert!(x.is_finite() && x >= 0.0);
    eval(0, x)
}

/// `J_1(x)` for finite `x >= 0`.
#[inline]
pub fn j1(x: f64) -> f64 {
    debug_assert!(x.is_finite() && x >= 0.0);
    eval(1, x)
}

/// `J_0(x)^2 + J_1(x)^2`, the envelope appearing in every closed-form map structure.
#[inline]
pub fn bessel_envelope(x: f64) -> f64 {
    let a = j0(x);
    let b = j1(x);
    a * a + b * b
}

fn eval(n: u32, x: f64) -> f64 {
    if x < ASYMPTOTIC_THRESHOLD {
        return bessel_series(n, x);
    }
    match n {
        0 | 1 => bessel_asymptotic(n, x),
        _ if (n as f64) < x => {
            // Forward recurrence is stable while n < x.
            let mut prev = bessel_asymptotic(0, x);
            let mut cur = bessel_asymptotic(1, x);
            for k in 1..n {
                let next = 2.0 * k as f64 / x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
        _ => bessel_series(n, x),
    }
}

/// Power series `sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)`, accumulated in
/// double-double so cancellation between large alternating terms does not
/// cost accuracy for moderate `x`.
pub fn bessel_series(n: u32, x: f64) -> f64 {
    let half = x * 0.5;
    let mut term = Dd::ONE;
    for k in 1..=n {
        term = term.mul_f64(half).div_f64(k as f64);
    }
    if term.hi == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let q = Dd::two_prod(half, half);
    let mut sum = term;
    for k in 1..400u32 {
        let denom = (k as f64) * ((k + n) as f64);
        term = term.mul(q).div_f64(-denom);
        sum = sum.add(term);
        if term.hi.abs() <= 1e-20 * sum.hi.abs() || term.hi == 0.0 {
            break;
        }
    }
    sum.hi + sum.lo
}

/// Hankel asymptotic expansion with optimal truncation:
/// `J_n(x) ~ sqrt(2/(pi x)) (P cos chi - Q sin chi)`, `chi = x - (n/2 + 1/4) pi`.
pub fn bessel_asymptotic(n: u32, x: f64) -> f64 {
    let mu = 4.0 * (n as f64) * (n as f64);
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut prev = f64::INFINITY;
    for k in 1..200usize {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * eight_x);
        if next.abs() >= prev && k > MIN_ASYMPTOTIC_TERMS {
            break;
        }
        term = next;
        prev = term.abs();
        // k odd feeds Q, k even feeds P; signs alternate in pairs.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term == 0.0 || (term.abs() < 1e-18 && k >= MIN_ASYMPTOTIC_TERMS) {
            break;
        }
    }
    let chi = x - (0.5 * n as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Minimal double-double number (unevaluated sum `hi + lo`).
#[derive(Clone, Copy, Debug)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    #[inline]
    fn quick_two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        Dd {
            hi: s,
            lo: b - (s - a),
        }
    }

    #[inline]
    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let r = Dd::quick_two_sum(s.hi, s.lo + t.hi);
        Dd::quick_two_sum(r.hi, r.lo + t.lo)
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    #[inline]
    fn mul_f64(self, b: f64) -> Dd {
        let p = Dd::two_prod(self.hi, b);
        Dd::quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    #[inline]
    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = Dd::two_prod(q1, b);
        let s = Dd::two_sum(self.hi, -p.hi);
        let e = s.lo - p.lo + self.lo;
        let q2 = (s.hi + e) / b;
        Dd::quick_two_sum(q1, q2)
    }
}
