//! Maximal-spacing constants, critical values and the r-convexity test.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::DensityField;
use crate::error::{Error, Result};
use crate::geom::arcs::CellArcs;
use crate::geom::{HullRegion, Point, Shape, TriangulationIndex};

/// `Gamma(k / 2)` for a positive integer `k`, by the half-integer recursion.
fn gamma_half(k: u32) -> f64 {
    assert!(k > 0);
    let (mut g, mut x) = if k.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Lebesgue measure of the unit ball in `R^d`.
pub fn unit_ball_volume(d: u32) -> f64 {
    std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d + 2)
}

/// Janson's constant `beta = (1/d!) (sqrt(pi) Gamma(d/2 + 1) / Gamma((d+1)/2))^(d-1)`.
pub fn beta_const(d: u32) -> f64 {
    assert!(d >= 1, "dimension must be at least 1");
    let fact: f64 = (1..=d).map(f64::from).product();
    let ratio = std::f64::consts::PI.sqrt() * gamma_half(d + 2) / gamma_half(d + 1);
    ratio.powi(d as i32 - 1) / fact
}

/// Dimension-dependent constants of the spacing statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeConstant {
    pub d: u32,
    pub beta: f64,
    pub w_d: f64,
    /// `w_d^(-1/d)`, the radius of the unit-volume ball.
    pub a_norm: f64,
}

impl ShapeConstant {
    pub fn new(d: u32) -> Self {
        let w_d = unit_ball_volume(d);
        ShapeConstant {
            d,
            beta: beta_const(d),
            w_d,
            a_norm: w_d.powf(-1.0 / d as f64),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 3 {
        Ok(())
    } else {
        Err(Error::SampleTooSmall { needed: 3, got: n })
    }
}

/// `c_{n,alpha} = (1/n)(-log(-log(1 - alpha)) + log n + (d - 1) log log n + log beta)`.
pub fn critical_value(n: usize, alpha: f64, d: u32) -> Result<f64> {
    check_alpha(alpha)?;
    check_n(n)?;
    let nf = n as f64;
    let g = -(-(-alpha).ln_1p()).ln();
    Ok((g + nf.ln() + (d as f64 - 1.0) * nf.ln().ln() + beta_const(d).ln()) / nf)
}

/// `U = n V - log n - (d - 1) log log n - log beta`.
pub fn u_statistic(v: f64, n: usize, d: u32) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    Ok(nf * v - nf.ln() - (d as f64 - 1.0) * nf.ln().ln() - beta_const(d).ln())
}

/// Radius of the ball `x + (c / f)^(1/d) A`: `(c / (w_d f))^(1/d)`.
pub fn ball_radius(c: f64, f: f64, d: u32) -> f64 {
    (c / (unit_ball_volume(d) * f)).powf(1.0 / d as f64)
}

/// Grid evaluation of the maximal spacing of a sample inside a known support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSpacing {
    /// `Delta_n`.
    pub delta: f64,
    /// `V_n = Delta_n^2`.
    pub v: f64,
    pub center: Point,
    /// Bound on the grid error of `delta`.
    pub error_bound: f64,
}

/// Maximal spacing computed by brute force over a `resolution x resolution` grid on the
/// support's bounding box. For simulations only: needs the true support and density.
///
/// At a grid point `x` in the support the largest admissible scaled ball has
/// `gamma(x) = (w_2 f(x))^(1/2) min(d(x, X_n), d(x, boundary))`.
pub fn maximal_spacing_oracle(
    points: &[Point],
    support: &dyn Shape,
    density: &(dyn Fn(Point) -> f64 + Sync),
    resolution: usize,
) -> Result<OracleSpacing> {
    if resolution < 64 {
        return Err(Error::InvalidConfig("oracle grid resolution must be at least 64".into()));
    }
    let bb = support.bbox();
    if !(bb.area() > 0.0) {
        return Err(Error::DegenerateSupport);
    }
    let cloud = crate::geom::PointCloud::new(points.to_vec()).ok();
    let (dx, dy) = (bb.width() / resolution as f64, bb.height() / resolution as f64);
    let w = unit_ball_volume(2);
    let best = (0..=resolution)
        .into_par_iter()
        .map(|iy| {
            let mut best = (f64::NEG_INFINITY, Point::default(), 0.0);
            for ix in 0..=resolution {
                let x = Point::new(bb.min.x + ix as f64 * dx, bb.min.y + iy as f64 * dy);
                if !support.contains(x) {
                    continue;
                }
                let nn = cloud.as_ref().map_or(f64::INFINITY, |c| c.distance(x));
                let f = density(x);
                let s = (w * f).sqrt();
                let g = s * nn.min(support.boundary_distance(x));
                if g > best.0 {
                    best = (g, x, s);
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, Point::default(), 0.0),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    if best.0 == f64::NEG_INFINITY {
        return Err(Error::DegenerateSupport);
    }
    let delta = best.0.max(0.0);
    Ok(OracleSpacing {
        delta,
        v: delta * delta,
        center: best.1,
        error_bound: best.2 * 0.5 * dx.hypot(dy),
    })
}

/// Sample points on the boundary of `C_m(X_n)`: those touched by an empty ball of radius `m`.
pub fn extreme_points(index: &TriangulationIndex, m: f64) -> Vec<usize> {
    (0..index.len())
        .filter(|&i| !CellArcs::compute(index, i, m).is_empty())
        .collect()
}

/// A candidate ball centre on the circle of radius `radius` around sample `site`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub x: Point,
    pub site: usize,
    /// Ball radius `(c_{n,alpha} / (w_2 f^_n(x)))^(1/2)`.
    pub radius: f64,
}

/// Region-independent part of the test: the critical value, the extreme points and the
/// candidate centres on their clipped circles. Reused across radii.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub n: usize,
    pub alpha: f64,
    pub c_crit: f64,
    /// `m = min_j c^{X_j, w}`.
    pub m: f64,
    pub extremes: Vec<usize>,
    pub per_circle: usize,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn build(field: &DensityField, alpha: f64, per_circle: usize) -> Result<CandidateSet> {
        let index = field.index();
        let n = index.len();
        let c_crit = critical_value(n, alpha, 2)?;
        if per_circle == 0 {
            return Err(Error::InvalidConfig("angular resolution must be positive".into()));
        }
        let radii: Vec<f64> = field
            .values()
            .iter()
            .map(|&f| ball_radius(c_crit, f, 2))
            .collect();
        let m = radii.iter().copied().fold(f64::INFINITY, f64::min);
        let extremes = extreme_points(index, m);
        let candidates: Vec<Candidate> = extremes
            .par_iter()
            .flat_map_iter(|&i| {
                let arcs = CellArcs::compute(index, i, radii[i]);
                arcs.sample(per_circle)
                    .into_iter()
                    .map(|x| {
                        // On a cell boundary the plug-in density takes the largest value.
                        let cells = index.cells_containing(x);
                        let radius = if cells.len() > 1 {
                            ball_radius(c_crit, field.cell_max(x), 2)
                        } else {
                            radii[i]
                        };
                        Candidate { x, site: i, radius }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(CandidateSet {
            n,
            alpha,
            c_crit,
            m,
            extremes,
            per_circle,
            candidates,
        })
    }

    /// Candidates inside `region`: the set `D(r)`.
    pub fn clipped(&self, region: &HullRegion) -> Vec<Candidate> {
        self.candidates
            .par_iter()
            .filter(|c| region.contains(c.x))
            .copied()
            .collect()
    }

    /// Runs the decision rule against `region`.
    pub fn evaluate(&self, region: &HullRegion) -> TestResult {
        let w = unit_ball_volume(2);
        // (candidate index, depth) for candidates inside the region.
        let inside: Vec<(usize, f64)> = self
            .candidates
            .par_iter()
            .enumerate()
            .filter_map(|(k, c)| region.inside_depth(c.x).map(|d| (k, d)))
            .collect();

        let mut best_margin: Option<(f64, usize)> = None;
        let mut m_r = 0.0f64;
        let mut v_hat = 0.0f64;
        for &(k, depth) in &inside {
            let c = &self.candidates[k];
            m_r = m_r.max(depth);
            let f = self.c_crit / (w * c.radius * c.radius);
            v_hat = v_hat.max(w * f * depth.min(c.radius).powi(2));
            let margin = depth - c.radius;
            if margin >= 0.0 && best_margin.is_none_or(|(b, _)| margin > b) {
                best_margin = Some((margin, k));
            }
        }
        let witness = best_margin.map(|(_, k)| {
            let c = self.candidates[k];
            Witness {
                center: c.x,
                radius: c.radius,
                site: c.site,
                depth: inside.iter().find(|e| e.0 == k).map_or(0.0, |e| e.1),
            }
        });
        TestResult {
            r: region.radius(),
            alpha: self.alpha,
            n: self.n,
            d: 2,
            c_crit: self.c_crit,
            statistic: SpacingStatistic {
                v_hat,
                delta_hat: v_hat.sqrt(),
                m_r,
                candidates: inside.len(),
                extremes: self.extremes.len(),
                per_circle: self.per_circle,
                witness,
            },
            reject: witness.is_some(),
            components_at_r: region.component_count(),
        }
    }
}

/// Ball certifying a rejection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub center: Point,
    pub radius: f64,
    /// Sample whose circle carries the centre.
    pub site: usize,
    /// Distance from the centre to the region boundary.
    pub depth: f64,
}

/// The spacing statistic evaluated on the candidate set `D(r)`.
///
/// `v_hat` is the largest `w_2 f^_n(x) min(d(x, boundary), radius(x))^2` over the
/// candidates. Each candidate's ball already avoids the sample, so the value saturates at
/// the critical value exactly when a candidate ball fits in the region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingStatistic {
    pub v_hat: f64,
    pub delta_hat: f64,
    /// `M(r)`: largest boundary distance over the candidates.
    pub m_r: f64,
    /// Size of `D(r)`.
    pub candidates: usize,
    /// Size of `E(m)`.
    pub extremes: usize,
    pub per_circle: usize,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `+inf` when tested against the convex hull.
    #[serde(with = "crate::serde_f64")]
    pub r: f64,
    pub alpha: f64,
    pub n: usize,
    pub d: u32,
    pub c_crit: f64,
    pub statistic: SpacingStatistic,
    pub reject: bool,
    pub components_at_r: usize,
}

/// One-shot test of r-convexity at radius `r`.
pub fn test_r_convexity(
    index: &Arc<TriangulationIndex>,
    r: f64,
    alpha: f64,
    field: &DensityField,
    per_circle: usize,
) -> Result<TestResult> {
    let set = CandidateSet::build(field, alpha, per_circle)?;
    let region = crate::geom::r_convex_hull(index, r)?;
    Ok(set.evaluate(&region))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_half_integers() {
        let sp = std::f64::consts::PI.sqrt();
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(4), 1.0);
        assert_eq!(gamma_half(6), 2.0);
        assert!((gamma_half(1) - sp).abs() < 1e-15);
        assert!((gamma_half(5) - 0.75 * sp).abs() < 1e-15);
    }

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(unit_ball_volume(1), 2.0);
    }

    #[test]
    fn beta_small_dims() {
        assert_eq!(beta_const(1), 1.0);
        assert_eq!(beta_const(2), 1.0);
    }

    #[test]
    fn critical_value_errors() {
        assert_eq!(critical_value(100, 1.5, 2).unwrap_err(), Error::AlphaOutOfRange(1.5));
        assert_eq!(
            critical_value(2, 0.05, 2).unwrap_err(),
            Error::SampleTooSmall { needed: 3, got: 2 }
        );
    }

    #[test]
    fn critical_value_at_one_minus_inverse_e() {
        let a = 1.0 - (-1.0f64).exp();
        let n = 500usize;
        let nf = n as f64;
        let c = critical_value(n, a, 2).unwrap();
        assert!((c - (nf.ln() + nf.ln().ln()) / nf).abs() < 1e-15);
    }
}
