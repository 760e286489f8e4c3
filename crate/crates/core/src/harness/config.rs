//! Experiment configuration: a flat `key = value` file plus overrides.
//!
//! ```text
//! # comment
//! name = fig1
//! curves = sigma1, sigma2:10:10
//! eps = 5
//! mu = 5
//! h = 0.015
//! N = 48
//! F = 10
//! lambda_max = 0.5
//! lambda_min = 0.3
//! snr_db = 10          # or "none"
//! seed = 0
//! functionals = SF, MF, WMF1, LOG
//! grid = 201           # or 201x151
//! tau = 0.01
//! c = 1, 0, 1
//! out_dir = runs/fig1  # optional
//! ```
//!
//! A curve is a catalog name (`sigma1`, `sigma2`) or an inline polynomial
//! `poly[x: a0 a1 ..; y: b0 b1 ..; s: smin smax]` with ascending
//! coefficients. Appending `:eps:mu` gives that inclusion its own material
//! parameters; otherwise the global `eps` and `mu` apply.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{catalog_curve, ParametricCurve, PolynomialCurve, ThinInclusion};
use crate::imaging::{Functional, ImageGrid};

/// One inclusion: curve plus optional per-inclusion material parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct InclusionSpec {
    pub curve: String,
    pub eps: Option<f64>,
    pub mu: Option<f64>,
}

impl InclusionSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (curve, rest) = if s.starts_with("poly[") {
            let end = s
                .find(']')
                .ok_or_else(|| Error::parse(format!("unterminated polynomial curve '{s}'")))?;
            (&s[..=end], &s[end + 1..])
        } else {
            match s.find(':') {
                Some(i) => (&s[..i], &s[i..]),
                None => (s, ""),
            }
        };
        let curve = curve.trim().to_string();
        if curve.is_empty() {
            return Err(Error::parse("empty curve name"));
        }
        let (eps, mu) = match rest.trim() {
            "" => (None, None),
            r => {
                let parts: Vec<&str> = r.trim_start_matches(':').split(':').collect();
                if parts.len() != 2 {
                    return Err(Error::parse(format!("expected curve:eps:mu, got '{s}'")));
                }
                (
                    Some(parse_f64("eps", parts[0])?),
                    Some(parse_f64("mu", parts[1])?),
                )
            }
        };
        Ok(InclusionSpec { curve, eps, mu })
    }

    pub fn build_curve(&self) -> Result<Arc<dyn ParametricCurve>> {
        if self.curve.starts_with("poly[") {
            Ok(Arc::new(parse_polynomial_curve(&self.curve)?))
        } else {
            catalog_curve(&self.curve)
        }
    }
}

impl std::fmt::Display for InclusionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.curve)?;
        if let (Some(e), Some(m)) = (self.eps, self.mu) {
            write!(f, ":{e}:{m}")?;
        }
        Ok(())
    }
}

/// Parses `poly[x: ..; y: ..; s: smin smax]`.
pub fn parse_polynomial_curve(s: &str) -> Result<PolynomialCurve> {
    let body = s
        .trim()
        .strip_prefix("poly[")
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::parse(format!("not a polynomial curve: '{s}'")))?;
    let (mut x, mut y, mut range) = (None, None, None);
    for part in body.split(';') {
        let (key, vals) = part
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("bad polynomial field '{part}'")))?;
        let nums = vals
            .split_whitespace()
            .map(|v| parse_f64(key.trim(), v))
            .collect::<Result<Vec<_>>>()?;
        match key.trim() {
            "x" => x = Some(nums),
            "y" => y = Some(nums),
            "s" if nums.len() == 2 => range = Some((nums[0], nums[1])),
            other => return Err(Error::parse(format!("bad polynomial field '{other}'"))),
        }
    }
    match (x, y, range) {
        (Some(x), Some(y), Some((a, b))) => PolynomialCurve::new(x, y, a, b),
        _ => Err(Error::parse(format!(
            "polynomial curve needs x, y and s fields: '{s}'"
        ))),
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub inclusions: Vec<InclusionSpec>,
    pub eps: f64,
    pub mu: f64,
    pub h: f64,
    pub n_directions: usize,
    pub n_frequencies: usize,
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// `None` means noiseless data.
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub functionals: Vec<Functional>,
    pub grid: (usize, usize),
    pub tau: f64,
    pub c: [f64; 3],
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "custom".into(),
            inclusions: vec![InclusionSpec {
                curve: "sigma1".into(),
                eps: None,
                mu: None,
            }],
            eps: 5.0,
            mu: 5.0,
            h: 0.015,
            n_directions: 48,
            n_frequencies: 10,
            lambda_max: 0.5,
            lambda_min: 0.3,
            snr_db: Some(10.0),
            seed: 0,
            functionals: vec![
                Functional::SingleFrequency,
                Functional::MultiFrequency,
                Functional::Weighted(1),
                Functional::Log,
            ],
            grid: (201, 201),
            tau: 0.01,
            c: [1.0, 0.0, 1.0],
            out_dir: None,
        }
    }
}

pub const PRESET_NAMES: [&str; 4] = ["fig1", "fig2", "fig3", "fig4"];

/// Built-in experiment setups. `fig3` (two inclusions
/// with equal parameters) is kept as a known case where log weighting does
/// not help.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let base = ExperimentConfig {
        name: name.to_string(),
        ..Default::default()
    };
    let incl = |s: &str| InclusionSpec::parse(s).expect("preset curve spec");
    match name {
        "fig1" => Ok(base),
        "fig2" => Ok(ExperimentConfig {
            inclusions: vec![incl("sigma2")],
            ..base
        }),
        "fig3" => Ok(ExperimentConfig {
            inclusions: vec![incl("sigma1"), incl("sigma2")],
            ..base
        }),
        "fig4" => Ok(ExperimentConfig {
            inclusions: vec![incl("sigma1"), incl("sigma2:10:10")],
            ..base
        }),
        other => Err(Error::config(format!(
            "unknown preset '{other}' (known: {})",
            PRESET_NAMES.join(", ")
        ))),
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::parse(format!("{key}: expected a number, got '{v}'")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::parse(format!("{key}: expected a nonnegative integer, got '{v}'")))
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Splits a curve list on commas that are not inside `poly[...]`.
fn split_curves(v: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0usize, 0usize);
    for (i, ch) in v.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                out.push(v[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(v[start..].trim());
    out.into_iter().filter(|s| !s.is_empty()).collect()
}

pub fn parse_grid(v: &str) -> Result<(usize, usize)> {
    let v = v.trim();
    match v.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse_usize("grid", a)?, parse_usize("grid", b)?)),
        None => {
            let n = parse_usize("grid", v)?;
            Ok((n, n))
        }
    }
}

impl ExperimentConfig {
    /// Sets one key. Keys match the file format; `-` and `_` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        match key.as_str() {
            "name" => self.name = v.to_string(),
            "curve" => self.inclusions = vec![InclusionSpec::parse(v)?],
            "curves" => {
                self.inclusions = split_curves(v)
                    .into_iter()
                    .map(InclusionSpec::parse)
                    .collect::<Result<_>>()?;
            }
            "eps" => self.eps = parse_f64("eps", v)?,
            "mu" => self.mu = parse_f64("mu", v)?,
            "h" => self.h = parse_f64("h", v)?,
            "N" | "n" => self.n_directions = parse_usize("N", v)?,
            "F" | "f" => self.n_frequencies = parse_usize("F", v)?,
            "lambda_max" => self.lambda_max = parse_f64("lambda_max", v)?,
            "lambda_min" => self.lambda_min = parse_f64("lambda_min", v)?,
            "snr_db" => {
                self.snr_db = match v.to_ascii_lowercase().as_str() {
                    "none" | "inf" | "clean" => None,
                    _ => Some(parse_f64("snr_db", v)?),
                }
            }
            "seed" => {
                self.seed = v
                    .parse()
                    .map_err(|_| Error::parse(format!("seed: bad integer '{v}'")))?
            }
            "functionals" | "functional" => {
                self.functionals = split_list(v).map(str::parse).collect::<Result<_>>()?;
            }
            "grid" => self.grid = parse_grid(v)?,
            "tau" => self.tau = parse_f64("tau", v)?,
            "c" => {
                let c = split_list(v)
                    .map(|x| parse_f64("c", x))
                    .collect::<Result<Vec<_>>>()?;
                self.c = c
                    .try_into()
                    .map_err(|_| Error::parse(format!("c: expected three numbers, got '{v}'")))?;
            }
            "out_dir" => {
                self.out_dir = if v.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(v))
                }
            }
            other => return Err(Error::parse(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Parses the key-value format on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| Error::parse(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = ExperimentConfig::default();
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            cfg.name = stem.to_string();
        }
        cfg.apply_text(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text form; parsing it reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# submig-config v1\n");
        let incl: Vec<String> = self.inclusions.iter().map(|i| i.to_string()).collect();
        let fun: Vec<String> = self.functionals.iter().map(|f| f.file_tag()).collect();
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "curves = {}", incl.join(", "));
        let _ = writeln!(s, "eps = {}", self.eps);
        let _ = writeln!(s, "mu = {}", self.mu);
        let _ = writeln!(s, "h = {}", self.h);
        let _ = writeln!(s, "N = {}", self.n_directions);
        let _ = writeln!(s, "F = {}", self.n_frequencies);
        let _ = writeln!(s, "lambda_max = {}", self.lambda_max);
        let _ = writeln!(s, "lambda_min = {}", self.lambda_min);
        match self.snr_db {
            Some(v) => {
                let _ = writeln!(s, "snr_db = {v}");
            }
            None => s.push_str("snr_db = none\n"),
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "functionals = {}", fun.join(", "));
        let _ = writeln!(s, "grid = {}x{}", self.grid.0, self.grid.1);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "c = {}, {}, {}", self.c[0], self.c[1], self.c[2]);
        if let Some(d) = &self.out_dir {
            let _ = writeln!(s, "out_dir = {}", d.display());
        }
        s
    }

    /// 64-bit FNV-1a of the canonical text, excluding the output directory.
    pub fn hash(&self) -> u64 {
        let text = ExperimentConfig {
            out_dir: None,
            ..self.clone()
        }
        .to_text();
        text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.inclusions.is_empty() {
            return Err(Error::config("at least one inclusion is required"));
        }
        if self.n_directions < 2 {
            return Err(Error::config("N must be at least 2"));
        }
        if self.n_frequencies < 1 {
            return Err(Error::config("F must be at least 1"));
        }
        if !(self.lambda_min > 0.0) || self.lambda_min > self.lambda_max {
            return Err(Error::config("need 0 < lambda_min <= lambda_max"));
        }
        if self.n_frequencies > 1 && self.lambda_min == self.lambda_max {
            return Err(Error::config(
                "several frequencies need lambda_min < lambda_max",
            ));
        }
        if let Some(v) = self.snr_db {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::config("snr_db must be a number or 'none'"));
            }
        }
        if self.functionals.is_empty() {
            return Err(Error::config("no functionals requested"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::config("tau must lie in (0, 1)"));
        }
        ImageGrid::new((-1.0, 1.0), (-1.0, 1.0), self.grid.0, self.grid.1)?;
        self.build_inclusions()?;
        Ok(())
    }

    pub fn build_inclusions(&self) -> Result<Vec<ThinInclusion>> {
        self.inclusions
            .iter()
            .map(|s| {
                ThinInclusion::new(
                    s.build_curve()?,
                    self.h,
                    s.eps.unwrap_or(self.eps),
                    s.mu.unwrap_or(self.mu),
                )
            })
            .collect()
    }

    pub fn image_grid(&self) -> Result<ImageGrid> {
        ImageGrid::new((-1.0, 1.0), (-1.0, 1.0), self.grid.0, self.grid.1)
    }
}
