//! Map quality scores relative to the true supporting curves.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{ParametricCurve, Polyline};
use crate::imaging::{ImageGrid, ImageMap};

const POLYLINE_SEGMENTS: usize = 2000;

/// Distance from each grid point to the nearest curve, computed once.
#[derive(Clone, Debug)]
pub struct CurveDistance {
    grid: ImageGrid,
    distances: Vec<f64>,
}

impl CurveDistance {
    pub fn new(curves: &[Arc<dyn ParametricCurve>], grid: &ImageGrid) -> Self {
        let lines: Vec<Polyline> = curves
            .iter()
            .map(|c| Polyline::from_curve(c.as_ref(), POLYLINE_SEGMENTS))
            .collect();
        let distances = grid
            .points()
            .into_iter()
            .map(|p| {
                lines
                    .iter()
                    .map(|l| l.distance(p))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        CurveDistance {
            grid: *grid,
            distances,
        }
    }

    fn check(&self, map: &ImageMap) -> Result<()> {
        if map.grid != self.grid {
            return Err(Error::config(
                "map grid differs from the distance table grid",
            ));
        }
        Ok(())
    }

    /// Fraction of map mass farther than `tube_radius` from every curve.
    pub fn sidelobe_energy(&self, map: &ImageMap, tube_radius: f64) -> Result<f64> {
        self.check(map)?;
        if !(tube_radius > 0.0) {
            return Err(Error::domain(format!(
                "tube radius must be positive, got {tube_radius}"
            )));
        }
        let total: f64 = map.values.iter().sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let outside: f64 = map
            .values
            .iter()
            .zip(&self.distances)
            .filter(|(_, d)| **d > tube_radius)
            .map(|(v, _)| v)
            .sum();
        Ok(outside / total)
    }

    /// Mean curve distance of the `k` largest map values (ties broken by grid order).
    pub fn localization_error(&self, map: &ImageMap, k: usize) -> Result<f64> {
        self.check(map)?;
        if k == 0 || k > map.values.len() {
            return Err(Error::domain(format!(
                "k must be in 1..={}, got {k}",
                map.values.len()
            )));
        }
        let mut idx: Vec<usize> = (0..map.values.len()).collect();
        idx.sort_by(|&a, &b| map.values[b].total_cmp(&map.values[a]).then(a.cmp(&b)));
        Ok(idx[..k].iter().map(|&i| self.distances[i]).sum::<f64>() / k as f64)
    }
}

pub fn sidelobe_energy(
    map: &ImageMap,
    curves: &[Arc<dyn ParametricCurve>],
    tube_radius: f64,
) -> Result<f64> {
    CurveDistance::new(curves, &map.grid).sidelobe_energy(map, tube_radius)
}

pub fn localization_error(
    map: &ImageMap,
    curves: &[Arc<dyn ParametricCurve>],
    k: usize,
) -> Result<f64> {
    CurveDistance::new(curves, &map.grid).localization_error(map, k)
}
