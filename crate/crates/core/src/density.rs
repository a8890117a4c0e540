//! Kernel density estimates at the sample points and the Voronoi-max plug-in density.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{HullRegion, Point, PointSet, TriangulationIndex};

/// A bivariate kernel `K: R^2 -> [0, inf)` integrating to one.
pub trait Kernel: Sync + Send {
    fn eval(&self, u: Point) -> f64;
    fn id(&self) -> &'static str;
}

/// Standard bivariate Gaussian, `K(u) = exp(-|u|^2 / 2) / (2 pi)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gaussian;

impl Kernel for Gaussian {
    fn eval(&self, u: Point) -> f64 {
        (-0.5 * u.norm2()).exp() / std::f64::consts::TAU
    }
    fn id(&self) -> &'static str {
        "gaussian"
    }
}

/// `f_n(X_i) = (1 / (n h^2)) sum_j K((X_i - X_j) / h)` for every sample point.
pub fn kde_at_samples(points: &PointSet, h: f64, kernel: &dyn Kernel) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NonpositiveBandwidth(h));
    }
    let pts = points.points();
    let norm = 1.0 / (pts.len() as f64 * h * h);
    Ok(pts
        .par_iter()
        .map(|&xi| {
            let s: f64 = pts.iter().map(|&xj| kernel.eval((xi - xj) * (1.0 / h))).sum();
            s * norm
        })
        .collect())
}

/// Average of the two coordinate standard deviations; 1 for a single point.
pub fn coordinate_sd(points: &PointSet) -> f64 {
    let n = points.len();
    if n < 2 {
        return 1.0;
    }
    let nf = n as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + p.x / nf, b + p.y / nf));
    let (vx, vy) = points.iter().fold((0.0, 0.0), |(a, b), p| {
        (a + (p.x - mx).powi(2), b + (p.y - my).powi(2))
    });
    0.5 * ((vx / (nf - 1.0)).sqrt() + (vy / (nf - 1.0)).sqrt())
}

/// `h = h0 * sigma * n^(-1 / (d + 4))`.
pub fn default_bandwidth(n: usize, d: u32, h0: f64, sigma: f64) -> f64 {
    h0 * sigma * (n.max(1) as f64).powf(-1.0 / (d as f64 + 4.0))
}

/// Bandwidth selection: the rule of thumb, or a fixed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthRule {
    pub h0: f64,
    /// Overrides the rule when set.
    #[serde(default)]
    pub explicit: Option<f64>,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule {
            h0: 1.0,
            explicit: None,
        }
    }
}

impl BandwidthRule {
    pub fn resolve(&self, points: &PointSet) -> Result<f64> {
        let h = match self.explicit {
            Some(h) => h,
            None => default_bandwidth(points.len(), 2, self.h0, coordinate_sd(points)),
        };
        if h > 0.0 && h.is_finite() {
            Ok(h)
        } else {
            Err(Error::NonpositiveBandwidth(h))
        }
    }
}

/// Density values attached to the sample points.
#[derive(Debug, Clone)]
pub struct DensityField {
    index: Arc<TriangulationIndex>,
    values: Vec<f64>,
    bandwidth: Option<f64>,
    kernel: String,
}

impl DensityField {
    /// Kernel estimate at every sample point.
    pub fn estimate(
        index: &Arc<TriangulationIndex>,
        rule: &BandwidthRule,
        kernel: &dyn Kernel,
    ) -> Result<DensityField> {
        let h = rule.resolve(index.points())?;
        let values = kde_at_samples(index.points(), h, kernel)?;
        Ok(DensityField {
            index: index.clone(),
            values,
            bandwidth: Some(h),
            kernel: kernel.id().to_string(),
        })
    }

    /// Known values, e.g. the true density evaluated at the sample points.
    pub fn from_values(index: &Arc<TriangulationIndex>, values: Vec<f64>) -> Result<DensityField> {
        if values.len() != index.len() {
            return Err(Error::InvalidConfig(format!(
                "{} density values for {} points",
                values.len(),
                index.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig(format!(
                "density value at point {i} must be positive and finite"
            )));
        }
        Ok(DensityField {
            index: index.clone(),
            values,
            bandwidth: None,
            kernel: "given".into(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn bandwidth(&self) -> Option<f64> {
        self.bandwidth
    }

    pub fn kernel(&self) -> &str {
        &self.kernel
    }

    pub fn index(&self) -> &Arc<TriangulationIndex> {
        &self.index
    }

    /// Largest value over the Voronoi cells containing `x`, ignoring the region indicator.
    pub fn cell_max(&self, x: Point) -> f64 {
        self.index
            .cells_containing(x)
            .into_iter()
            .map(|i| self.values[i])
            .fold(0.0, f64::max)
    }
}

/// `f^_n(x)`: the largest `f_n(X_i)` over the cells containing `x`, and zero outside the region.
pub fn voronoi_max_density(x: Point, field: &DensityField, region: &HullRegion) -> f64 {
    if region.contains(x) {
        field.cell_max(x)
    } else {
        0.0
    }
}
