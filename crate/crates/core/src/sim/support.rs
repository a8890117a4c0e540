//! Known supports and densities for simulations.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BBox, Point, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscSpec {
    pub center: Point,
    pub radius: f64,
}

/// A planar support with exact membership, distances and area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SyntheticSupport {
    Disc { center: Point, radius: f64 },
    Annulus { center: Point, r_in: f64, r_out: f64 },
    /// Union of pairwise disjoint discs.
    Discs { discs: Vec<DiscSpec> },
    Rectangle { min: Point, max: Point },
}

impl SyntheticSupport {
    pub fn unit_disc() -> Self {
        SyntheticSupport::Disc {
            center: Point::new(0.0, 0.0),
            radius: 1.0,
        }
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Self {
        SyntheticSupport::Annulus {
            center: Point::new(0.0, 0.0),
            r_in,
            r_out,
        }
    }

    pub fn unit_square() -> Self {
        SyntheticSupport::Rectangle {
            min: Point::new(0.0, 0.0),
            max: Point::new(1.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        match self {
            SyntheticSupport::Disc { radius, .. } if !(*radius > 0.0) => bad("disc radius must be positive"),
            SyntheticSupport::Annulus { r_in, r_out, .. } if !(*r_in > 0.0 && r_in < r_out) => {
                bad("annulus radii must satisfy 0 < r_in < r_out")
            }
            SyntheticSupport::Rectangle { min, max } if !(min.x < max.x && min.y < max.y) => {
                Err(Error::DegenerateSupport)
            }
            SyntheticSupport::Discs { discs } => {
                if discs.is_empty() {
                    return Err(Error::DegenerateSupport);
                }
                for (k, a) in discs.iter().enumerate() {
                    if !(a.radius > 0.0) {
                        return bad("disc radius must be positive");
                    }
                    for b in &discs[k + 1..] {
                        if a.center.dist(b.center) <= a.radius + b.radius {
                            return bad("discs must be pairwise disjoint");
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            SyntheticSupport::Disc { radius, .. } => PI * radius * radius,
            SyntheticSupport::Annulus { r_in, r_out, .. } => PI * (r_out * r_out - r_in * r_in),
            SyntheticSupport::Discs { discs } => discs.iter().map(|d| PI * d.radius * d.radius).sum(),
            SyntheticSupport::Rectangle { min, max } => (max.x - min.x) * (max.y - min.y),
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            SyntheticSupport::Disc { center, .. } | SyntheticSupport::Annulus { center, .. } => *center,
            SyntheticSupport::Discs { discs } => {
                let total: f64 = discs.iter().map(|d| d.radius * d.radius).sum();
                discs
                    .iter()
                    .fold(Point::default(), |acc, d| acc + d.center * (d.radius * d.radius / total))
            }
            SyntheticSupport::Rectangle { min, max } => min.midpoint(*max),
        }
    }

    /// Largest `|u . (x - centroid)|` over the support, for a unit vector `u`.
    pub fn half_extent(&self, u: Point) -> f64 {
        let c = self.centroid();
        match self {
            SyntheticSupport::Disc { radius, .. } => *radius,
            SyntheticSupport::Annulus { r_out, .. } => *r_out,
            SyntheticSupport::Discs { discs } => discs
                .iter()
                .map(|d| u.dot(d.center - c).abs() + d.radius)
                .fold(0.0, f64::max),
            SyntheticSupport::Rectangle { min, max } => {
                0.5 * (u.x.abs() * (max.x - min.x) + u.y.abs() * (max.y - min.y))
            }
        }
    }

    /// Largest `r` for which the support is r-convex, where it is known in closed form.
    /// Infinite for convex supports.
    pub fn r0(&self) -> Option<f64> {
        match self {
            SyntheticSupport::Disc { .. } | SyntheticSupport::Rectangle { .. } => Some(f64::INFINITY),
            SyntheticSupport::Annulus { r_in, .. } => Some(*r_in),
            SyntheticSupport::Discs { discs } if discs.len() == 1 => Some(f64::INFINITY),
            SyntheticSupport::Discs { .. } => None,
        }
    }
}

impl Shape for SyntheticSupport {
    fn bbox(&self) -> BBox {
        match self {
            SyntheticSupport::Disc { center, radius } => BBox::new(*center, *center).inflate(*radius),
            SyntheticSupport::Annulus { center, r_out, .. } => BBox::new(*center, *center).inflate(*r_out),
            SyntheticSupport::Discs { discs } => discs
                .iter()
                .map(|d| BBox::new(d.center, d.center).inflate(d.radius))
                .reduce(BBox::union)
                .expect("validated non-empty"),
            SyntheticSupport::Rectangle { min, max } => BBox::new(*min, *max),
        }
    }

    fn contains(&self, x: Point) -> bool {
        match self {
            SyntheticSupport::Disc { center, radius } => x.dist2(*center) <= radius * radius,
            SyntheticSupport::Annulus { center, r_in, r_out } => {
                let d2 = x.dist2(*center);
                d2 >= r_in * r_in && d2 <= r_out * r_out
            }
            SyntheticSupport::Discs { discs } => {
                discs.iter().any(|d| x.dist2(d.center) <= d.radius * d.radius)
            }
            SyntheticSupport::Rectangle { min, max } => BBox::new(*min, *max).contains(x),
        }
    }

    fn distance(&self, x: Point) -> f64 {
        match self {
            SyntheticSupport::Disc { center, radius } => (x.dist(*center) - radius).max(0.0),
            SyntheticSupport::Annulus { center, r_in, r_out } => {
                let rho = x.dist(*center);
                (r_in - rho).max(rho - r_out).max(0.0)
            }
            SyntheticSupport::Discs { discs } => discs
                .iter()
                .map(|d| (x.dist(d.center) - d.radius).max(0.0))
                .fold(f64::INFINITY, f64::min),
            SyntheticSupport::Rectangle { min, max } => BBox::new(*min, *max).distance(x),
        }
    }

    fn boundary_distance(&self, x: Point) -> f64 {
        match self {
            SyntheticSupport::Disc { center, radius } => (x.dist(*center) - radius).abs(),
            SyntheticSupport::Annulus { center, r_in, r_out } => {
                let rho = x.dist(*center);
                (rho - r_in).abs().min((rho - r_out).abs())
            }
            SyntheticSupport::Discs { discs } => discs
                .iter()
                .map(|d| (x.dist(d.center) - d.radius).abs())
                .fold(f64::INFINITY, f64::min),
            SyntheticSupport::Rectangle { min, max } => {
                let b = BBox::new(*min, *max);
                if b.contains(x) {
                    (x.x - min.x).min(max.x - x.x).min(x.y - min.y).min(max.y - x.y)
                } else {
                    b.distance(x)
                }
            }
        }
    }

    fn boundary_samples(&self, step: f64) -> Vec<Point> {
        let circle = |c: Point, r: f64| {
            let k = ((TAU * r / step).ceil() as usize).max(8);
            (0..k)
                .map(move |i| c + Point::from_angle(i as f64 * TAU / k as f64) * r)
                .collect::<Vec<_>>()
        };
        match self {
            SyntheticSupport::Disc { center, radius } => circle(*center, *radius),
            SyntheticSupport::Annulus { center, r_in, r_out } => {
                let mut v = circle(*center, *r_in);
                v.extend(circle(*center, *r_out));
                v
            }
            SyntheticSupport::Discs { discs } => {
                discs.iter().flat_map(|d| circle(d.center, d.radius)).collect()
            }
            SyntheticSupport::Rectangle { min, max } => {
                let corners = [*min, Point::new(max.x, min.y), *max, Point::new(min.x, max.y)];
                let mut v = Vec::new();
                for k in 0..4 {
                    let (a, b) = (corners[k], corners[(k + 1) % 4]);
                    let m = ((a.dist(b) / step).ceil() as usize).max(1);
                    v.extend((0..m).map(|s| a + (b - a) * (s as f64 / m as f64)));
                }
                v
            }
        }
    }
}

/// Sampling density on a support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticDensity {
    Uniform,
    /// `f(x) = (1 + slope * u.(x - centroid) / L) / area` with `u` the unit vector at
    /// `angle` and `L` the support's half extent along `u`. Requires `0 <= slope < 1`.
    Ramp { slope: f64, angle: f64 },
}

/// Analytic constants of a density on its support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    /// Lower bound `f_0`.
    pub f0: f64,
    /// Maximum `f_1`.
    pub f1: f64,
    /// Lipschitz constant `k_f`.
    pub k_f: f64,
}

impl SyntheticDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            SyntheticDensity::Ramp { slope, angle } if !(*slope >= 0.0 && *slope < 1.0 && angle.is_finite()) => {
                Err(Error::InvalidConfig("ramp slope must lie in [0, 1)".into()))
            }
            _ => Ok(()),
        }
    }

    /// Density at `x`; zero off the support.
    pub fn eval(&self, support: &SyntheticSupport, x: Point) -> f64 {
        if !support.contains(x) {
            return 0.0;
        }
        let a = support.area();
        match *self {
            SyntheticDensity::Uniform => 1.0 / a,
            SyntheticDensity::Ramp { slope, angle } => {
                let u = Point::from_angle(angle);
                let l = support.half_extent(u);
                (1.0 + slope * u.dot(x - support.centroid()) / l) / a
            }
        }
    }

    pub fn bounds(&self, support: &SyntheticSupport) -> DensityBounds {
        let a = support.area();
        match *self {
            SyntheticDensity::Uniform => DensityBounds {
                f0: 1.0 / a,
                f1: 1.0 / a,
                k_f: 0.0,
            },
            SyntheticDensity::Ramp { slope, angle } => {
                let l = support.half_extent(Point::from_angle(angle));
                DensityBounds {
                    f0: (1.0 - slope) / a,
                    f1: (1.0 + slope) / a,
                    k_f: slope / (a * l),
                }
            }
        }
    }
}
