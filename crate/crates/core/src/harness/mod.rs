//! Experiment runner: synthesize data, image, score and persist.

mod config;
mod metrics;

pub use config::{
    parse_grid, parse_polynomial_curve, preset, ExperimentConfig, InclusionSpec, PRESET_NAMES,
};
pub use metrics::{localization_error, sidelobe_energy, CurveDistance};

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result, ResultExt};
use crate::forward::{
    add_awgn_stream, assemble_msr_union, make_directions, write_msr, FrequencySet, MsrMatrix,
};
use crate::geometry::{effective_segment_count, ParametricCurve, ThinInclusion};
use crate::imaging::{map_multi, map_single, Functional, ImageMap, SteeringConfig, Weighting};
use crate::specfun::Quadrature;
use crate::spectral::{effective_rank, svd, write_spectrum_csv, SvdFactors};

/// Scores of one map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapMetrics {
    pub sidelobe_energy: f64,
    pub localization_error: f64,
    pub peak_value: f64,
    pub peak_location: [f64; 2],
}

/// Singular values of the MSR matrix at one frequency.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencySpectrum {
    pub omega: f64,
    pub wavelength: f64,
    pub singular_values: Vec<f64>,
    pub effective_rank: usize,
    pub segment_count: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub config_hash: u64,
    pub maps: BTreeMap<Functional, ImageMap>,
    pub metrics: BTreeMap<Functional, MapMetrics>,
    pub spectra: Vec<FrequencySpectrum>,
    /// Tube radius used for the sidelobe metric (half the shortest wavelength).
    pub tube_radius: f64,
    /// Number of top grid points scored by the localization metric: the
    /// total segment count at the shortest wavelength.
    pub localization_k: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
}

#[derive(Serialize)]
struct MetricsJson<'a> {
    format: &'static str,
    name: &'a str,
    config_hash: String,
    seed: u64,
    snr_db: Option<f64>,
    grid: [usize; 2],
    tube_radius: f64,
    localization_k: usize,
    started_unix: f64,
    finished_unix: f64,
    metrics: BTreeMap<String, &'a MapMetrics>,
    spectra: &'a [FrequencySpectrum],
}

impl ExperimentReport {
    pub fn metrics_json(&self) -> Result<String> {
        let doc = MetricsJson {
            format: "submig-metrics v1",
            name: &self.config.name,
            config_hash: format!("{:016x}", self.config_hash),
            seed: self.config.seed,
            snr_db: self.config.snr_db,
            grid: [self.config.grid.0, self.config.grid.1],
            tube_radius: self.tube_radius,
            localization_k: self.localization_k,
            started_unix: self.started_unix,
            finished_unix: self.finished_unix,
            metrics: self
                .metrics
                .iter()
                .map(|(f, m)| (f.to_string(), m))
                .collect(),
            spectra: &self.spectra,
        };
        serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Numerical(format!("metrics serialization: {e}")))
    }

    /// Writes every artifact of the run into `dir`.
    pub fn persist(&self, dir: &Path, measured: &[MsrMatrix]) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.txt"), self.config.to_text())?;
        for (f, k) in measured.iter().enumerate() {
            write_msr(
                k,
                BufWriter::new(File::create(dir.join(format!("msr_f{:02}.txt", f + 1)))?),
            )?;
        }
        for (f, s) in self.spectra.iter().enumerate() {
            let file = File::create(dir.join(format!("spectrum_f{:02}.csv", f + 1)))?;
            write_spectrum_csv(&s.singular_values, BufWriter::new(file))?;
        }
        for (fun, map) in &self.maps {
            let tag = fun.file_tag();
            map.write_csv(BufWriter::new(File::create(
                dir.join(format!("map_{tag}.csv")),
            )?))?;
            map.write_pgm(
                BufWriter::new(File::create(dir.join(format!("map_{tag}.pgm")))?),
                16,
            )?;
        }
        fs::write(dir.join("metrics.json"), self.metrics_json()?)?;
        Ok(())
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Measured MSR matrices and their SVDs, one per frequency (longest wavelength first).
pub fn synthesize(
    cfg: &ExperimentConfig,
    inclusions: &[ThinInclusion],
    q: &Quadrature,
) -> Result<Vec<(MsrMatrix, SvdFactors)>> {
    let dirs = Arc::new(make_directions(cfg.n_directions)?);
    let freqs = FrequencySet::equispaced(cfg.lambda_max, cfg.lambda_min, cfg.n_frequencies)?;
    freqs
        .omegas()
        .into_par_iter()
        .enumerate()
        .map(|(f, omega)| {
            let clean = assemble_msr_union(&dirs, omega, inclusions, q)?;
            let k = match cfg.snr_db {
                Some(snr) => add_awgn_stream(&clean, snr, cfg.seed, f as u64)?,
                None => clean,
            };
            let factors = svd(&k)?;
            Ok((k, factors))
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .enumerate()
        .map(|(f, r)| r.context(|| format!("frequency {}", f + 1)))
        .collect()
}

/// Runs one experiment end to end and persists artifacts when `out_dir` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_inner(cfg).context(|| format!("experiment '{}' (config {:016x})", cfg.name, cfg.hash()))
}

fn run_inner(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started_unix = unix_now();
    cfg.validate()?;
    let q = Quadrature::default();
    let inclusions = cfg.build_inclusions()?;
    let curves: Vec<Arc<dyn ParametricCurve>> =
        inclusions.iter().map(|i| i.curve.clone()).collect();
    let grid = cfg.image_grid()?;
    let steering = SteeringConfig::new(cfg.c)?;

    let data = synthesize(cfg, &inclusions, &q)?;

    let mut spectra = Vec::with_capacity(data.len());
    for (k, s) in &data {
        let mut segments = 0;
        for inc in &inclusions {
            segments += effective_segment_count(inc.curve.as_ref(), k.wavelength(), &q)?;
        }
        spectra.push(FrequencySpectrum {
            omega: k.omega,
            wavelength: k.wavelength(),
            singular_values: s.singular_values.clone(),
            effective_rank: effective_rank(s, cfg.tau)?,
            segment_count: segments,
        });
    }

    let pairs: Vec<(&MsrMatrix, &SvdFactors)> = data.iter().map(|(k, s)| (k, s)).collect();
    // Single-frequency maps use the highest frequency.
    let (k_hi, s_hi) = pairs
        .iter()
        .copied()
        .max_by(|a, b| a.0.omega.total_cmp(&b.0.omega))
        .ok_or_else(|| Error::config("no frequencies"))?;

    let mut maps = BTreeMap::new();
    for &fun in &cfg.functionals {
        let map = match fun {
            Functional::SingleFrequency => map_single(k_hi, s_hi, &grid, &steering, cfg.tau),
            Functional::MultiFrequency => {
                map_multi(&pairs, &grid, &steering, cfg.tau, Weighting::One)
            }
            Functional::Weighted(n) => {
                map_multi(&pairs, &grid, &steering, cfg.tau, Weighting::Power(n))
            }
            Functional::Log => map_multi(&pairs, &grid, &steering, cfg.tau, Weighting::Log),
        }
        .context(|| format!("functional {fun}"))?;
        maps.insert(fun, map);
    }

    let tube_radius = cfg.lambda_min / 2.0;
    let localization_k = spectra
        .iter()
        .max_by(|a, b| a.omega.total_cmp(&b.omega))
        .map(|s| s.segment_count)
        .unwrap_or(1)
        .max(1);
    let dist = CurveDistance::new(&curves, &grid);
    let mut metrics = BTreeMap::new();
    for (fun, map) in &maps {
        let (_, peak) = map.argmax();
        let m = MapMetrics {
            sidelobe_energy: dist.sidelobe_energy(map, tube_radius)?,
            localization_error: dist.localization_error(map, localization_k)?,
            peak_value: map.max(),
            peak_location: [peak.x, peak.y],
        };
        if !(m.sidelobe_energy.is_finite()
            && m.localization_error.is_finite()
            && m.peak_value.is_finite())
        {
            return Err(Error::Numerical(format!("non-finite metric for {fun}")));
        }
        metrics.insert(*fun, m);
    }

    let mut report = ExperimentReport {
        config: cfg.clone(),
        config_hash: cfg.hash(),
        maps,
        metrics,
        spectra,
        tube_radius,
        localization_k,
        started_unix,
        finished_unix: 0.0,
    };
    report.finished_unix = unix_now();
    if let Some(dir) = &cfg.out_dir {
        let measured: Vec<MsrMatrix> = data.into_iter().map(|(k, _)| k).collect();
        report
            .persist(dir, &measured)
            .context(|| format!("writing results to {}", dir.display()))?;
    }
    Ok(report)
}
