//! Forward model: far-field MSR matrices of thin inclusions.
//!
//! Entries follow the leading-order asymptotic expansion of the far-field
//! pattern with the curve integral replaced by one representative point per
//! half-wavelength segment:
//!
//! ```text
//! K_jl = h w^2 (1+i) / (4 sqrt(w pi)) * |sigma|/M * sum_m [ (eps-1)
//!        + 2(1/mu-1)(theta_j.t_m)(theta_l.t_m) + 2(1-mu)(theta_j.n_m)(theta_l.n_m) ]
//!        * exp(i w (theta_j + theta_l).y_m)
//! ```
//!
//! Observation directions are the negated incident directions, which is why
//! only `theta` appears.

mod io;
mod noise;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{effective_segment_count, sample_curve, CurveSample, ThinInclusion, Vec2};
use crate::linalg::ComplexMatrix;
use crate::specfun::Quadrature;

pub use io::{read_msr, write_msr, MSR_FORMAT_HEADER};
pub use noise::{add_awgn, add_awgn_stream};

/// Incident directions `theta_l` on the unit circle; observation directions
/// are `-theta_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Vec2>,
}

impl DirectionSet {
    pub fn new(directions: Vec<Vec2>) -> Result<Self> {
        if directions.len() < 2 {
            return Err(Error::domain(
                "a direction set needs at least two directions",
            ));
        }
        for (i, d) in directions.iter().enumerate() {
            if (d.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!("direction {i} is not a unit vector")));
            }
            if directions[..i].iter().any(|e| e.distance(*d) < 1e-12) {
                return Err(Error::domain(format!("direction {i} is repeated")));
            }
        }
        Ok(DirectionSet { directions })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn as_slice(&self) -> &[Vec2] {
        &self.directions
    }

    pub fn get(&self, l: usize) -> Option<Vec2> {
        self.directions.get(l).copied()
    }
}

/// `theta_l = -(cos 2 pi (l-1)/N, sin 2 pi (l-1)/N)` for `l = 1..N`.
pub fn make_directions(n: usize) -> Result<DirectionSet> {
    if n < 2 {
        return Err(Error::domain(format!("need N >= 2 directions, got {n}")));
    }
    let dirs = (0..n)
        .map(|l| {
            let a = 2.0 * PI * l as f64 / n as f64;
            Vec2::new(-a.cos(), -a.sin())
        })
        .collect();
    DirectionSet::new(dirs)
}

/// One applied noise realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseRecord {
    pub snr_db: f64,
    pub seed: u64,
    pub stream: u64,
}

/// How a matrix was produced: clean, or with noise layers applied in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub noise: Vec<NoiseRecord>,
}

impl Provenance {
    pub fn is_clean(&self) -> bool {
        self.noise.is_empty()
    }
}

/// Far-field MSR matrix at one angular frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct MsrMatrix {
    pub omega: f64,
    pub directions: Arc<DirectionSet>,
    pub matrix: ComplexMatrix,
    pub provenance: Provenance,
}

impl MsrMatrix {
    pub fn new(omega: f64, directions: Arc<DirectionSet>, matrix: ComplexMatrix) -> Result<Self> {
        let n = directions.len();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::config(format!(
                "matrix is {}x{} but there are {n} directions",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if matrix
            .as_slice()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::domain("MSR matrix has non-finite entries"));
        }
        Ok(MsrMatrix {
            omega,
            directions,
            matrix,
            provenance: Provenance::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, j: usize, l: usize) -> Complex64 {
        self.matrix[(j, l)]
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `||K - K^T||_F / ||K||_F` (zero for the zero matrix).
    pub fn symmetry_residual(&self) -> f64 {
        let norm = self.matrix.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.matrix.sub(&self.matrix.transpose()).frobenius_norm() / norm
    }

    /// Mean squared entry magnitude.
    pub fn mean_power(&self) -> f64 {
        let n2 = (self.n() * self.n()) as f64;
        self.matrix
            .as_slice()
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            / n2
    }

    /// Entrywise sum of two matrices measured with the same directions and frequency.
    pub fn sum(&self, other: &MsrMatrix) -> Result<MsrMatrix> {
        if self.directions != other.directions || self.omega != other.omega {
            return Err(Error::config(
                "cannot add MSR matrices with different directions or frequency",
            ));
        }
        let mut provenance = self.provenance.clone();
        provenance
            .noise
            .extend(other.provenance.noise.iter().copied());
        Ok(MsrMatrix {
            omega: self.omega,
            directions: self.directions.clone(),
            matrix: self.matrix.add(&other.matrix),
            provenance,
        })
    }

    /// Multiplies every entry by a scalar.
    pub fn scaled(&self, s: Complex64) -> MsrMatrix {
        MsrMatrix {
            matrix: self.matrix.scale(s),
            ..self.clone()
        }
    }
}

/// Wavelengths `lambda_1 >= ... >= lambda_F` and their angular frequencies `2 pi / lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySet {
    wavelengths: Vec<f64>,
}

impl FrequencySet {
    pub fn from_wavelengths(wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.is_empty() {
            return Err(Error::domain("frequency set is empty"));
        }
        if wavelengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::domain("wavelengths must be positive and finite"));
        }
        if wavelengths.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::domain("wavelengths must be strictly decreasing"));
        }
        Ok(FrequencySet { wavelengths })
    }

    /// `count` wavelengths equally spaced from `lambda_max` down to `lambda_min`, inclusive.
    pub fn equispaced(lambda_max: f64, lambda_min: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::domain("frequency count must be at least 1")),
            1 => Self::from_wavelengths(vec![lambda_max]),
            _ => {
                let step = (lambda_min - lambda_max) / (count - 1) as f64;
                let mut w: Vec<f64> = (0..count).map(|f| lambda_max + step * f as f64).collect();
                w[count - 1] = lambda_min;
                Self::from_wavelengths(w)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.wavelengths.iter().map(|l| 2.0 * PI / l).collect()
    }
}

/// `h w^2 (1+i) / (4 sqrt(w pi))`.
pub fn far_field_prefactor(h: f64, omega: f64) -> Complex64 {
    Complex64::new(1.0, 1.0) * (h * omega * omega / (4.0 * (omega * PI).sqrt()))
}

/// Polarization tensor eigenvalues `(eps - eps0, 2(1/mu - 1/mu0), 2(1/mu0 - mu/mu0^2))`.
fn contrasts(inc: &ThinInclusion) -> (f64, f64, f64) {
    let mu0 = inc.background_permeability;
    (
        inc.permittivity - inc.background_permittivity,
        2.0 * (1.0 / inc.permeability - 1.0 / mu0),
        2.0 * (1.0 / mu0 - inc.permeability / (mu0 * mu0)),
    )
}

/// One MSR entry `K_jl` for a sampled inclusion.
pub fn far_field_entry(
    j: usize,
    l: usize,
    dirs: &DirectionSet,
    omega: f64,
    inclusion: &ThinInclusion,
    samples: &[CurveSample],
) -> Result<Complex64> {
    let n = dirs.len();
    let (tj, tl) = match (dirs.get(j), dirs.get(l)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::domain(format!(
                "index ({j}, {l}) out of range for N = {n}"
            )))
        }
    };
    Ok(entry_unchecked(tj, tl, omega, inclusion, samples))
}

fn entry_unchecked(
    tj: Vec2,
    tl: Vec2,
    omega: f64,
    inclusion: &ThinInclusion,
    samples: &[CurveSample],
) -> Complex64 {
    let (c_eps, c_t, c_n) = contrasts(inclusion);
    let sum_dir = tj + tl;
    let mut acc = Complex64::new(0.0, 0.0);
    for s in samples {
        let bracket = c_eps
            + c_t * tj.dot(s.tangent) * tl.dot(s.tangent)
            + c_n * tj.dot(s.normal) * tl.dot(s.normal);
        let phase = Complex64::from_polar(1.0, omega * sum_dir.dot(s.point));
        acc += phase * (bracket * s.weight);
    }
    far_field_prefactor(inclusion.half_thickness, omega) * acc
}

/// Samples an inclusion at the resolution of the wavelength `2 pi / omega`.
pub fn resolution_samples(
    inclusion: &ThinInclusion,
    omega: f64,
    q: &Quadrature,
) -> Result<Vec<CurveSample>> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::domain(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    let m = effective_segment_count(inclusion.curve.as_ref(), 2.0 * PI / omega, q)?;
    sample_curve(inclusion, m, q)
}

/// Assembles the MSR matrix of one inclusion.
pub fn assemble_msr(
    dirs: &Arc<DirectionSet>,
    omega: f64,
    inclusion: &ThinInclusion,
    q: &Quadrature,
) -> Result<MsrMatrix> {
    assemble_msr_union(dirs, omega, std::slice::from_ref(inclusion), q)
}

/// Assembles the MSR matrix of a union of inclusions as the sum of their
/// individual contributions.
pub fn assemble_msr_union(
    dirs: &Arc<DirectionSet>,
    omega: f64,
    inclusions: &[ThinInclusion],
    q: &Quadrature,
) -> Result<MsrMatrix> {
    let sampled = inclusions
        .iter()
        .map(|inc| Ok((inc, resolution_samples(inc, omega, q)?)))
        .collect::<Result<Vec<_>>>()?;
    let total_m: usize = sampled.iter().map(|(_, s)| s.len()).sum();
    if total_m >= dirs.len() {
        return Err(Error::config(format!(
            "resolution assumption violated: {total_m} segments but only {} directions",
            dirs.len()
        )));
    }
    let n = dirs.len();
    let theta = dirs.as_slice();
    let mut matrix = ComplexMatrix::zeros(n, n);
    for (inc, samples) in &sampled {
        for j in 0..n {
            for l in 0..n {
                matrix[(j, l)] += entry_unchecked(theta[j], theta[l], omega, inc, samples);
            }
        }
    }
    MsrMatrix::new(omega, dirs.clone(), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sigma1, PolynomialCurve};

    fn q() -> Quadrature {
        Quadrature::default()
    }

    #[test]
    fn four_directions() {
        let d = make_directions(4).unwrap();
        let want = [(-1.0, 0.0), (0.0, -1.0), (1.0, 0.0), (0.0, 1.0)];
        for (got, (x, y)) in d.as_slice().iter().zip(want) {
            assert!((got.x - x).abs() < 1e-15 && (got.y - y).abs() < 1e-15);
        }
        assert!(make_directions(1).is_err());
    }

    #[test]
    fn directions_sum_to_zero() {
        for n in [2, 3, 7, 48, 100] {
            let d = make_directions(n).unwrap();
            let s = d.as_slice().iter().fold(Vec2::default(), |a, b| a + *b);
            assert!(s.norm() < 1e-12, "N={n}");
        }
        let d = make_directions(48).unwrap();
        let step =
            d.as_slice()[1].y.atan2(d.as_slice()[1].x) - d.as_slice()[0].y.atan2(d.as_slice()[0].x);
        let step = step.rem_euclid(2.0 * PI);
        assert!((step - 2.0 * PI / 48.0).abs() < 1e-12);
    }

    #[test]
    fn zero_contrast_gives_zero_entries() {
        let dirs = Arc::new(make_directions(4).unwrap());
        let inc = ThinInclusion::new(Arc::new(sigma1()), 0.015, 1.0, 1.0).unwrap();
        let k = assemble_msr(&dirs, 4.0, &inc, &q()).unwrap();
        assert!(k
            .matrix
            .as_slice()
            .iter()
            .all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn single_sample_at_origin() {
        let dirs = make_directions(8).unwrap();
        let curve = Arc::new(PolynomialCurve::new(vec![-0.05, 1.0], vec![0.0], 0.0, 0.1).unwrap());
        let inc = ThinInclusion::new(curve, 0.02, 3.0, 2.0).unwrap();
        let omega = 9.0;
        let samples = sample_curve(&inc, 1, &q()).unwrap();
        assert!(samples[0].point.norm() < 1e-12);
        let (j, l) = (1, 6);
        let tj = dirs.as_slice()[j];
        let tl = dirs.as_slice()[l];
        let t = Vec2::new(1.0, 0.0);
        let n = Vec2::new(0.0, 1.0);
        let bracket = 2.0
            + 2.0 * (0.5 - 1.0) * tj.dot(t) * tl.dot(t)
            + 2.0 * (1.0 - 2.0) * tj.dot(n) * tl.dot(n);
        let want = Complex64::new(1.0, 1.0)
            * (0.02 * omega * omega / (4.0 * (omega * PI).sqrt()))
            * 0.1
            * bracket;
        let got = far_field_entry(j, l, &dirs, omega, &inc, &samples).unwrap();
        assert!((got - want).norm() < 1e-14);
        assert_eq!(
            got,
            far_field_entry(l, j, &dirs, omega, &inc, &samples).unwrap()
        );
        assert!(far_field_entry(8, 0, &dirs, omega, &inc, &samples).is_err());
    }

    #[test]
    fn too_many_segments_is_a_configuration_error() {
        let dirs = Arc::new(make_directions(4).unwrap());
        let inc = ThinInclusion::new(Arc::new(sigma1()), 0.015, 5.0, 5.0).unwrap();
        assert!(matches!(
            assemble_msr(&dirs, 2.0 * PI / 0.5, &inc, &q()),
            Err(Error::Configuration(_))
        ));
    }

    #[test]
    fn frequency_sets() {
        let f = FrequencySet::equispaced(0.5, 0.3, 10).unwrap();
        assert_eq!(f.len(), 10);
        assert_eq!(f.wavelengths()[0], 0.5);
        assert_eq!(f.wavelengths()[9], 0.3);
        let w = f.omegas();
        assert!(w.windows(2).all(|p| p[1] > p[0]));
        assert!(FrequencySet::equispaced(0.3, 0.5, 3).is_err());
        assert!(FrequencySet::equispaced(0.5, 0.3, 0).is_err());
        assert_eq!(FrequencySet::equispaced(0.5, 0.5, 1).unwrap().len(), 1);
    }
}
