//! Subspace migration imaging functionals.
//!
//! For a search point `z` and frequency `w`, the steering vector has
//! components `c . [1, theta_l] exp(i w theta_l . z)`. The single-frequency
//! map is
//!
//! ```text
//! W_SF(z; w) = | sum_{m <= M} <W(z), U_m> <W(z), conj(V_m)> |,   <a, b> = conj(a) . b
//! ```
//!
//! and the multi-frequency maps sum the inner term over frequencies with a
//! weight `xi(w_f)`: 1 (MF, divided by F), `w^n` (WMF) or `ln w` (LOG).

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forward::{DirectionSet, MsrMatrix};
use crate::geometry::Vec2;
use crate::spectral::{effective_rank, SvdFactors};

/// Steering weights `c` and whether test vectors are scaled to unit norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteeringConfig {
    pub c: [f64; 3],
    pub normalize: bool,
}

impl Default for SteeringConfig {
    fn default() -> Self {
        SteeringConfig {
            c: [1.0, 0.0, 1.0],
            normalize: true,
        }
    }
}

impl SteeringConfig {
    pub fn new(c: [f64; 3]) -> Result<Self> {
        if c.iter().all(|&v| v == 0.0) || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(
                "steering vector c must be finite and nonzero",
            ));
        }
        Ok(SteeringConfig { c, normalize: true })
    }
}

/// Per-direction weights `c . [1, theta_l]`, with the norm of the resulting
/// test vector (independent of `z`).
fn steering_weights(dirs: &DirectionSet, cfg: &SteeringConfig) -> Result<(Vec<f64>, f64)> {
    let w: Vec<f64> = dirs
        .as_slice()
        .iter()
        .map(|t| cfg.c[0] + cfg.c[1] * t.x + cfg.c[2] * t.y)
        .collect();
    let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    let cmax = cfg.c.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if norm <= cmax * 1e-12 * (w.len() as f64).sqrt() {
        return Err(Error::DegenerateSteering);
    }
    let scale = if cfg.normalize { 1.0 / norm } else { 1.0 };
    Ok((w.into_iter().map(|v| v * scale).collect(), norm))
}

/// Test vector `W(z; w)`.
pub fn test_vector(
    z: Vec2,
    omega: f64,
    dirs: &DirectionSet,
    cfg: &SteeringConfig,
) -> Result<Vec<Complex64>> {
    if dirs.is_empty() {
        return Err(Error::domain("direction set is empty"));
    }
    let (weights, _) = steering_weights(dirs, cfg)?;
    Ok(dirs
        .as_slice()
        .iter()
        .zip(&weights)
        .map(|(t, a)| Complex64::from_polar(*a, omega * t.dot(z)))
        .collect())
}

/// Uniform rectangular grid of search points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Default for ImageGrid {
    fn default() -> Self {
        ImageGrid {
            x_range: (-1.0, 1.0),
            y_range: (-1.0, 1.0),
            nx: 201,
            ny: 201,
        }
    }
}

impl ImageGrid {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::domain("grid resolution must be at least 2 per axis"));
        }
        if !(x_range.0 < x_range.1) || !(y_range.0 < y_range.1) {
            return Err(Error::domain("grid ranges must be increasing"));
        }
        Ok(ImageGrid {
            x_range,
            y_range,
            nx,
            ny,
        })
    }

    /// Square grid over `[-1, 1]^2`.
    pub fn square(resolution: usize) -> Result<Self> {
        Self::new((-1.0, 1.0), (-1.0, 1.0), resolution, resolution)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (
            (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64,
            (self.y_range.1 - self.y_range.0) / (self.ny - 1) as f64,
        )
    }

    /// Point at column `ix` and row `iy` (row 0 is the smallest `y`).
    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        let (dx, dy) = self.cell_size();
        Vec2::new(
            self.x_range.0 + dx * ix as f64,
            self.y_range.0 + dy * iy as f64,
        )
    }

    /// Point with flat index `k = iy * nx + ix`.
    pub fn point_at(&self, k: usize) -> Vec2 {
        self.point(k % self.nx, k / self.nx)
    }

    pub fn points(&self) -> Vec<Vec2> {
        (0..self.len()).map(|k| self.point_at(k)).collect()
    }
}

/// Which imaging functional produced a map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Functional {
    SingleFrequency,
    MultiFrequency,
    Weighted(u32),
    Log,
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::SingleFrequency => write!(f, "SF"),
            Functional::MultiFrequency => write!(f, "MF"),
            Functional::Weighted(n) => write!(f, "WMF({n})"),
            Functional::Log => write!(f, "LOG"),
        }
    }
}

impl FromStr for Functional {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        match t.as_str() {
            "SF" => Ok(Functional::SingleFrequency),
            "MF" => Ok(Functional::MultiFrequency),
            "LOG" => Ok(Functional::Log),
            _ => {
                let n = t
                    .strip_prefix("WMF")
                    .map(|r| r.trim_start_matches('(').trim_end_matches(')'))
                    .ok_or_else(|| Error::parse(format!("unknown functional '{s}'")))?;
                n.parse()
                    .map(Functional::Weighted)
                    .map_err(|_| Error::parse(format!("bad WMF order in '{s}'")))
            }
        }
    }
}

impl Functional {
    /// File-name friendly tag: `SF`, `MF`, `WMF1`, `LOG`.
    pub fn file_tag(&self) -> String {
        match self {
            Functional::Weighted(n) => format!("WMF{n}"),
            other => other.to_string(),
        }
    }
}

/// Frequency weight `xi(w)` of a multi-frequency map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Weighting {
    One,
    Power(u32),
    Log,
}

impl Weighting {
    pub fn weight(&self, omega: f64) -> Result<f64> {
        match self {
            Weighting::One => Ok(1.0),
            Weighting::Power(n) => Ok(omega.powi(*n as i32)),
            Weighting::Log => {
                if omega <= 1.0 {
                    Err(Error::domain(format!(
                        "log weighting needs omega > 1, got {omega}"
                    )))
                } else {
                    Ok(omega.ln())
                }
            }
        }
    }

    fn functional(&self) -> Functional {
        match self {
            Weighting::One => Functional::MultiFrequency,
            Weighting::Power(n) => Functional::Weighted(*n),
            Weighting::Log => Functional::Log,
        }
    }
}

/// Nonnegative map values on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageMap {
    pub grid: ImageGrid,
    pub values: Vec<f64>,
    pub functional: Functional,
    pub omegas: Vec<f64>,
}

impl ImageMap {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Flat index and location of the largest value (first one on ties).
    pub fn argmax(&self) -> (usize, Vec2) {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = k;
            }
        }
        (best, self.grid.point_at(best))
    }

    /// Copy scaled to unit maximum (unchanged if the map is identically zero).
    pub fn normalized(&self) -> ImageMap {
        let m = self.max();
        let values = if m > 0.0 {
            self.values.iter().map(|v| v / m).collect()
        } else {
            self.values.clone()
        };
        ImageMap {
            values,
            ..self.clone()
        }
    }

    /// CSV with header `x,y,value`, rows in grid order (x fastest, y increasing).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# submig-map v1 functional={}", self.functional)?;
        writeln!(w, "x,y,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let p = self.grid.point_at(k);
            writeln!(w, "{:.16e},{:.16e},{:.16e}", p.x, p.y, v)?;
        }
        Ok(())
    }

    /// Binary PGM (P5) of the max-normalized map; `bits` is 8 or 16. The first
    /// image row is the largest `y`, so `y` increases upward when displayed.
    pub fn write_pgm<W: Write>(&self, mut w: W, bits: u8) -> Result<()> {
        let maxval: u32 = match bits {
            8 => 255,
            16 => 65535,
            _ => {
                return Err(Error::domain(format!(
                    "PGM depth must be 8 or 16 bits, got {bits}"
                )))
            }
        };
        let norm = self.normalized();
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        write!(
            w,
            "P5\n# submig-map v1 functional={}\n{nx} {ny}\n{maxval}\n",
            self.functional
        )?;
        let mut bytes = Vec::with_capacity(nx * ny * if bits == 8 { 1 } else { 2 });
        for iy in (0..ny).rev() {
            for ix in 0..nx {
                let v = norm.values[iy * nx + ix].clamp(0.0, 1.0);
                let level = (v * maxval as f64).round() as u32;
                if bits == 8 {
                    bytes.push(level as u8);
                } else {
                    bytes.extend_from_slice(&(level as u16).to_be_bytes());
                }
            }
        }
        w.write_all(&bytes)?;
        Ok(())
    }
}

/// Signal subspace of one frequency, prepared for fast evaluation.
struct Subspace {
    omega: f64,
    /// Columns `U_m` for `m < M`.
    u: Vec<Vec<Complex64>>,
    /// Columns `conj(V_m)` for `m < M`.
    vbar: Vec<Vec<Complex64>>,
}

impl Subspace {
    fn new(k: &MsrMatrix, factors: &SvdFactors, tau: f64) -> Result<Self> {
        if factors.u.rows() != k.n() {
            return Err(Error::config(
                "SVD factors do not match the MSR matrix size",
            ));
        }
        let rank = effective_rank(factors, tau)?;
        if rank == 0 {
            return Err(Error::EmptySubspace);
        }
        Ok(Subspace {
            omega: k.omega,
            u: (0..rank).map(|m| factors.u.column(m)).collect(),
            vbar: (0..rank)
                .map(|m| factors.v.column(m).iter().map(|z| z.conj()).collect())
                .collect(),
        })
    }

    /// `sum_m <W, U_m> <W, conj(V_m)>` at point `z`.
    fn correlate(
        &self,
        z: Vec2,
        theta: &[Vec2],
        weights: &[f64],
        scratch: &mut Vec<Complex64>,
    ) -> Complex64 {
        scratch.clear();
        // conj(W_l)
        scratch.extend(
            theta
                .iter()
                .zip(weights)
                .map(|(t, a)| Complex64::from_polar(*a, -self.omega * t.dot(z))),
        );
        let mut acc = Complex64::new(0.0, 0.0);
        for (u, vb) in self.u.iter().zip(&self.vbar) {
            let mut a = Complex64::new(0.0, 0.0);
            let mut b = Complex64::new(0.0, 0.0);
            for ((w, x), y) in scratch.iter().zip(u).zip(vb) {
                a += w * x;
                b += w * y;
            }
            acc += a * b;
        }
        acc
    }
}

/// Evaluates `|sum_f xi_f * corr_f(z)| * scale` over the grid, in parallel.
fn evaluate(
    subspaces: &[(f64, Subspace)],
    dirs: &DirectionSet,
    grid: &ImageGrid,
    cfg: &SteeringConfig,
    scale: f64,
) -> Result<Vec<f64>> {
    let (weights, _) = steering_weights(dirs, cfg)?;
    let theta = dirs.as_slice();
    Ok((0..grid.len())
        .into_par_iter()
        .map_init(Vec::new, |scratch, k| {
            let z = grid.point_at(k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (xi, s) in subspaces {
                acc += s.correlate(z, theta, &weights, scratch) * *xi;
            }
            acc.norm() * scale
        })
        .collect())
}

/// Single-frequency subspace migration.
pub fn map_single(
    k: &MsrMatrix,
    factors: &SvdFactors,
    grid: &ImageGrid,
    cfg: &SteeringConfig,
    tau: f64,
) -> Result<ImageMap> {
    let sub = Subspace::new(k, factors, tau)?;
    let values = evaluate(&[(1.0, sub)], &k.directions, grid, cfg, 1.0)?;
    Ok(ImageMap {
        grid: *grid,
        values,
        functional: Functional::SingleFrequency,
        omegas: vec![k.omega],
    })
}

/// Multi-frequency subspace migration with frequency weight `xi`. The
/// unweighted map is divided by the number of frequencies.
pub fn map_multi(
    data: &[(&MsrMatrix, &SvdFactors)],
    grid: &ImageGrid,
    cfg: &SteeringConfig,
    tau: f64,
    weighting: Weighting,
) -> Result<ImageMap> {
    let (first, _) = data
        .first()
        .ok_or_else(|| Error::domain("map_multi needs at least one frequency"))?;
    if data.iter().any(|(k, _)| k.directions != first.directions) {
        return Err(Error::config(
            "all MSR matrices must share one direction set",
        ));
    }
    let subspaces = data
        .iter()
        .map(|(k, f)| Ok((weighting.weight(k.omega)?, Subspace::new(k, f, tau)?)))
        .collect::<Result<Vec<_>>>()?;
    let scale = match weighting {
        Weighting::One => 1.0 / data.len() as f64,
        _ => 1.0,
    };
    let values = evaluate(&subspaces, &first.directions, grid, cfg, scale)?;
    Ok(ImageMap {
        grid: *grid,
        values,
        functional: weighting.functional(),
        omegas: data.iter().map(|(k, _)| k.omega).collect(),
    })
}
