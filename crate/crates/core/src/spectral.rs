//! Complex SVD by one-sided (Hestenes) Jacobi rotations, and singular-value
//! thresholding.
//!
//! Columns of a working copy of `K` are rotated pairwise until they are
//! mutually orthogonal; the accumulated rotations form `V`, the column norms
//! are the singular values and the normalized columns are `U`. Columns whose
//! norm is at rounding level are replaced by an orthonormal completion so
//! that `U` stays unitary for rank-deficient input.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forward::MsrMatrix;
use crate::linalg::ComplexMatrix;

const MAX_SWEEPS: usize = 80;

/// `K = U diag(rho) V^H`, with `rho` descending.
///
/// In the notation `K = sum_m rho_m U_m conj(V_m)^T`, the
/// `conj(V_m)` is the complex conjugate of column `m` of [`SvdFactors::v`].
#[derive(Clone, Debug, PartialEq)]
pub struct SvdFactors {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl SvdFactors {
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    /// Number of singular values at or above `tau * rho_1`.
    pub fn effective_rank(&self, tau: f64) -> Result<usize> {
        effective_rank(self, tau)
    }

    /// `U diag(rho) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        ComplexMatrix::from_fn(m, n, |i, j| {
            self.singular_values
                .iter()
                .enumerate()
                .map(|(k, s)| self.u[(i, k)] * self.v[(j, k)].conj() * s)
                .sum()
        })
    }

    /// `(||U^H U - I||_max, ||V^H V - I||_max)`.
    pub fn orthonormality_residuals(&self) -> (f64, f64) {
        let check = |m: &ComplexMatrix| {
            let g = m.adjoint().matmul(m);
            let id = ComplexMatrix::identity(g.rows());
            g.sub(&id)
                .as_slice()
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max)
        };
        (check(&self.u), check(&self.v))
    }
}

/// Full SVD of an MSR matrix.
pub fn svd(k: &MsrMatrix) -> Result<SvdFactors> {
    svd_dense(&k.matrix)
}

/// Full SVD of a square complex matrix.
pub fn svd_dense(a: &ComplexMatrix) -> Result<SvdFactors> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::domain("svd_dense expects a square matrix"));
    }
    if a.as_slice()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::domain("svd input has non-finite entries"));
    }
    if n == 0 {
        return Ok(SvdFactors {
            u: ComplexMatrix::zeros(0, 0),
            singular_values: vec![],
            v: ComplexMatrix::zeros(0, 0),
        });
    }

    // Column-major working copies.
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    let tol = f64::EPSILON * n as f64;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&cols[p], &cols[q]);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        alpha += cp[i].norm_sqr();
                        beta += cq[i].norm_sqr();
                        gamma += cp[i].conj() * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0 || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate (a_p, e^{-i phi} a_q), which have a real inner product g.
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let ph = phase.conj();
                rotate(&mut cols, p, q, c, s, ph);
                rotate(&mut vcols, p, q, c, s, ph);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps"
        )));
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        norms[j]
            .partial_cmp(&norms[i])
            .expect("norms are finite")
            .then(i.cmp(&j))
    });

    let largest = norms[order[0]];
    let null_cut = largest * f64::EPSILON * n as f64;
    let mut ucols: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    let mut v_sorted = Vec::with_capacity(n);
    for &j in &order {
        let sigma = norms[j];
        singular_values.push(sigma);
        v_sorted.push(vcols[j].clone());
        if sigma > null_cut && sigma > 0.0 {
            ucols.push(Some(cols[j].iter().map(|z| z / sigma).collect()));
        } else {
            ucols.push(None);
        }
    }
    let mut ucols = complete_basis(ucols, n);

    // Phase convention: the largest-magnitude entry of each U_m is real positive.
    for (uc, vc) in ucols.iter_mut().zip(v_sorted.iter_mut()) {
        let mut best = 0;
        for (i, z) in uc.iter().enumerate() {
            if z.norm() > uc[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let pivot = uc[best];
        if pivot.norm() > 0.0 {
            let fix = (pivot / pivot.norm()).conj();
            uc.iter_mut().for_each(|z| *z *= fix);
            vc.iter_mut().for_each(|z| *z *= fix);
        }
    }

    Ok(SvdFactors {
        u: ComplexMatrix::from_fn(n, n, |i, j| ucols[j][i]),
        singular_values,
        v: ComplexMatrix::from_fn(n, n, |i, j| v_sorted[j][i]),
    })
}

/// Applies `[a_p, a_q] <- [c a_p - s ph a_q, s a_p + c ph a_q]`.
fn rotate(cols: &mut [Vec<Complex64>], p: usize, q: usize, c: f64, s: f64, ph: Complex64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for i in 0..cp.len() {
        let x = cp[i];
        let y = cq[i] * ph;
        cp[i] = x * c - y * s;
        cq[i] = x * s + y * c;
    }
}

/// Fills `None` slots with unit vectors orthogonal to every other column.
/// Each slot takes the standard basis vector with the largest component
/// outside the current span (two-pass Gram-Schmidt); with `k` slots left that
/// component has norm at least `sqrt(k / n)`.
fn complete_basis(cols: Vec<Option<Vec<Complex64>>>, n: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = cols.iter().flatten().cloned().collect();
    let project_out = |basis: &[Vec<Complex64>], i: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in basis {
                let proj: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
            }
        }
        v
    };
    let mut out = Vec::with_capacity(cols.len());
    for c in cols {
        match c {
            Some(v) => out.push(v),
            None => {
                let (v, norm) = (0..n)
                    .map(|i| {
                        let v = project_out(&basis, i);
                        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                        (v, norm)
                    })
                    .fold(
                        (Vec::new(), -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
                let v: Vec<Complex64> = v.into_iter().map(|z| z / norm).collect();
                basis.push(v.clone());
                out.push(v);
            }
        }
    }
    out
}

/// `#{m : rho_m >= tau * rho_1}`; zero only for the zero matrix.
pub fn effective_rank(s: &SvdFactors, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::domain(format!(
            "threshold must lie in (0, 1), got {tau}"
        )));
    }
    Ok(rank_of(&s.singular_values, tau))
}

pub(crate) fn rank_of(rho: &[f64], tau: f64) -> usize {
    match rho.first() {
        Some(&top) if top > 0.0 => rho.iter().take_while(|&&r| r >= tau * top).count(),
        _ => 0,
    }
}

/// Writes the spectrum as CSV rows `m,rho_m,rho_m/rho_1` (1-based `m`).
pub fn write_spectrum_csv<W: Write>(s: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "# submig-spectrum v1")?;
    writeln!(w, "m,rho,rho_over_rho1")?;
    let top = s.first().copied().unwrap_or(0.0);
    for (m, r) in s.iter().enumerate() {
        let rel = if top > 0.0 { r / top } else { 0.0 };
        writeln!(w, "{},{:.16e},{:.16e}", m + 1, r, rel)?;
    }
    Ok(())
}
