//! Calibrated additive white Gaussian noise.
//!
//! Noise is circularly-symmetric complex Gaussian with per-entry variance
//! `P_s 10^(-snr/10)`, where `P_s` is the mean squared entry magnitude of the
//! input matrix; the variance is split evenly between real and imaginary
//! parts. Samples come from ChaCha8 seeded with `seed`, on ChaCha stream
//! `stream`, drawn in row-major order (real part first).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{MsrMatrix, NoiseRecord};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Adds noise at `snr_db` using stream 0 of `seed`. `snr_db = +inf` returns the input unchanged.
pub fn add_awgn(k: &MsrMatrix, snr_db: f64, seed: u64) -> Result<MsrMatrix> {
    add_awgn_stream(k, snr_db, seed, 0)
}

/// Like [`add_awgn`] but on an explicit substream, so each matrix of a
/// multi-frequency run gets an independent realization from one seed.
pub fn add_awgn_stream(k: &MsrMatrix, snr_db: f64, seed: u64, stream: u64) -> Result<MsrMatrix> {
    if snr_db == f64::INFINITY {
        return Ok(k.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::domain(format!(
            "SNR must be finite or +inf, got {snr_db}"
        )));
    }
    let variance = k.mean_power() * 10f64.powf(-snr_db / 10.0);
    let sd = (0.5 * variance).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = k.n();
    let mut data = Vec::with_capacity(n * n);
    for z in k.matrix.as_slice() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        data.push(z + Complex64::new(sd * re, sd * im));
    }
    let mut provenance = k.provenance.clone();
    provenance.noise.push(NoiseRecord {
        snr_db,
        seed,
        stream,
    });
    Ok(MsrMatrix {
        omega: k.omega,
        directions: k.directions.clone(),
        matrix: ComplexMatrix::from_row_major(n, n, data),
        provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::make_directions;
    use std::sync::Arc;

    fn sample_matrix() -> MsrMatrix {
        let dirs = Arc::new(make_directions(6).unwrap());
        let m = ComplexMatrix::from_fn(6, 6, |i, j| {
            Complex64::new((i + j) as f64, i as f64 - j as f64)
        });
        MsrMatrix::new(10.0, dirs, m).unwrap()
    }

    #[test]
    fn infinite_snr_is_identity() {
        let k = sample_matrix();
        assert_eq!(add_awgn(&k, f64::INFINITY, 3).unwrap(), k);
    }

    #[test]
    fn rejects_nan_and_negative_infinity() {
        let k = sample_matrix();
        assert!(add_awgn(&k, f64::NAN, 0).is_err());
        assert!(add_awgn(&k, f64::NEG_INFINITY, 0).is_err());
    }

    #[test]
    fn seeded_output_is_bitwise_reproducible() {
        let k = sample_matrix();
        let a = add_awgn(&k, 10.0, 42).unwrap();
        let b = add_awgn(&k, 10.0, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, add_awgn(&k, 10.0, 43).unwrap());
        assert_ne!(a, add_awgn_stream(&k, 10.0, 42, 1).unwrap());
        assert_eq!(
            a.provenance.noise,
            vec![NoiseRecord {
                snr_db: 10.0,
                seed: 42,
                stream: 0
            }]
        );
    }

    #[test]
    fn noise_composes() {
        let k = sample_matrix();
        let twice = add_awgn(&add_awgn(&k, 20.0, 1).unwrap(), 20.0, 2).unwrap();
        assert_eq!(twice.provenance.noise.len(), 2);
    }
}
