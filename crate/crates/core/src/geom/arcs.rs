//! Circles around a sample point clipped to its Voronoi cell.
//!
//! A point at distance `rho` from sample `X_i` lies in `Vor(X_i)` exactly when no other
//! sample is closer than `rho`; on the circle this removes, for every Delaunay neighbour
//! `X_j` with `|X_j - X_i| < 2 rho`, the open arc of half-width `acos(|X_j - X_i| / 2 rho)`
//! around the direction of `X_j`. What is left is a union of closed angular intervals.

use std::f64::consts::TAU;

use super::index::TriangulationIndex;
use super::point::Point;

pub const NO_NEIGHBOR: usize = usize::MAX;

/// A closed counter-clockwise arc `[start, end]` of the circle. Each endpoint records the
/// neighbour whose bisector cuts the circle there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcInterval {
    pub start: f64,
    pub end: f64,
    pub start_neighbor: usize,
    pub end_neighbor: usize,
}

impl ArcInterval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        (theta - self.start).rem_euclid(TAU) <= self.len()
    }
}

/// `circle(X_i, radius) ∩ Vor(X_i)`.
#[derive(Debug, Clone)]
pub struct CellArcs {
    pub site: usize,
    pub center: Point,
    pub radius: f64,
    /// The whole circle survives (no neighbour within `2 * radius`).
    pub full: bool,
    pub intervals: Vec<ArcInterval>,
}

impl CellArcs {
    pub fn compute(index: &TriangulationIndex, site: usize, radius: f64) -> CellArcs {
        let center = index.point(site);
        let mut pieces: Vec<(f64, f64, usize, usize)> = Vec::new();
        for &j in index.neighbors(site) {
            let v = index.point(j) - center;
            let d = v.norm();
            if d >= 2.0 * radius {
                continue;
            }
            let half = (d / (2.0 * radius)).acos();
            let s = (v.angle() - half).rem_euclid(TAU);
            let e = s + 2.0 * half;
            if e <= TAU {
                pieces.push((s, e, j, j));
            } else {
                pieces.push((s, TAU, j, NO_NEIGHBOR));
                pieces.push((0.0, e - TAU, NO_NEIGHBOR, j));
            }
        }
        if pieces.is_empty() {
            return CellArcs {
                site,
                center,
                radius,
                full: true,
                intervals: Vec::new(),
            };
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));

        // Union of the excluded open arcs as linear blocks on [0, 2pi].
        let mut blocks: Vec<(f64, f64, usize, usize)> = Vec::new();
        for p in pieces {
            match blocks.last_mut() {
                Some(b) if p.0 <= b.1 => {
                    if p.1 > b.1 {
                        b.1 = p.1;
                        b.3 = p.3;
                    }
                }
                _ => blocks.push(p),
            }
        }

        let m = blocks.len();
        let mut intervals = Vec::new();
        for k in 0..m {
            let cur = blocks[k];
            let next = blocks[(k + 1) % m];
            let gap_end = if k + 1 == m { next.0 + TAU } else { next.0 };
            if gap_end - cur.1 <= 0.0 {
                continue;
            }
            if cur.3 == NO_NEIGHBOR || next.2 == NO_NEIGHBOR {
                continue;
            }
            let start = cur.1.rem_euclid(TAU);
            intervals.push(ArcInterval {
                start,
                end: start + (gap_end - cur.1),
                start_neighbor: cur.3,
                end_neighbor: next.2,
            });
        }
        CellArcs {
            site,
            center,
            radius,
            full: false,
            intervals,
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.full && self.intervals.is_empty()
    }

    pub fn point_at(&self, theta: f64) -> Point {
        self.center + Point::from_angle(theta) * self.radius
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        self.full || self.intervals.iter().any(|iv| iv.contains_angle(theta))
    }

    /// Total angular measure of the surviving arcs.
    pub fn measure(&self) -> f64 {
        if self.full {
            TAU
        } else {
            self.intervals.iter().map(|iv| iv.len()).sum()
        }
    }

    /// Euclidean distance from `x` to the arc set. Infinite when the set is empty.
    pub fn distance(&self, x: Point) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        let v = x - self.center;
        let rho = v.norm();
        if rho == 0.0 {
            return self.radius;
        }
        if self.contains_angle(v.angle()) {
            return (rho - self.radius).abs();
        }
        self.intervals
            .iter()
            .flat_map(|iv| [iv.start, iv.end])
            .map(|t| x.dist(self.point_at(t)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Points on the arcs: every multiple of `2 pi / per_circle` inside an interval, plus
    /// each interval's midpoint so short arcs are never skipped.
    pub fn sample(&self, per_circle: usize) -> Vec<Point> {
        let step = TAU / per_circle.max(1) as f64;
        if self.full {
            return (0..per_circle.max(1))
                .map(|k| self.point_at(k as f64 * step))
                .collect();
        }
        let mut out = Vec::new();
        for iv in &self.intervals {
            let first = (iv.start / step).ceil() as i64;
            let last = (iv.end / step).floor() as i64;
            out.push(self.point_at(0.5 * (iv.start + iv.end)));
            for k in first..=last {
                out.push(self.point_at(k as f64 * step));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point::PointSet;
    use std::f64::consts::PI;

    fn index(xy: &[(f64, f64)]) -> TriangulationIndex {
        TriangulationIndex::new(PointSet::from_xy(xy).unwrap()).unwrap()
    }

    #[test]
    fn isolated_site_keeps_full_circle() {
        let idx = index(&[(0.0, 0.0), (3.0, 0.0), (0.0, 3.0)]);
        let a = CellArcs::compute(&idx, 0, 1.0);
        assert!(a.full);
        assert!((a.measure() - TAU).abs() < 1e-15);
    }

    #[test]
    fn single_neighbor_removes_symmetric_arc() {
        let idx = index(&[(0.0, 0.0), (1.0, 0.0)]);
        let a = CellArcs::compute(&idx, 0, 1.0);
        // acos(1/2) = pi/3 on either side of the neighbour direction.
        assert_eq!(a.intervals.len(), 1);
        let iv = a.intervals[0];
        assert!((iv.start - PI / 3.0).abs() < 1e-12);
        assert!((iv.end - (TAU - PI / 3.0)).abs() < 1e-12);
        assert_eq!((iv.start_neighbor, iv.end_neighbor), (1, 1));
    }

    #[test]
    fn wraparound_interval_is_joined() {
        // Neighbour straight up: the free arc passes through angle 0.
        let idx = index(&[(0.0, 0.0), (0.0, 1.0)]);
        let a = CellArcs::compute(&idx, 0, 1.0);
        assert_eq!(a.intervals.len(), 1);
        assert!(a.contains_angle(0.0));
        assert!(a.contains_angle(-PI / 2.0));
        assert!(!a.contains_angle(PI / 2.0));
        assert!((a.measure() - (TAU - 2.0 * PI / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn arc_points_are_equidistant_to_their_nearest_sample() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|k| {
                let t = k as f64 * 0.37;
                ((t * 1.3).sin() * 2.0 + 0.01 * k as f64, (t * 0.7).cos() * 1.5)
            })
            .collect();
        let idx = index(&pts);
        for i in 0..idx.len() {
            let a = CellArcs::compute(&idx, i, 0.4);
            for p in a.sample(64) {
                let d = idx.nearest_distance(p);
                assert!((d - 0.4).abs() < 1e-9, "site {i}: nearest {d}");
            }
        }
    }
}
