//! Boundary edges (straight segments and circular arcs) and closed loops built from them.

use std::f64::consts::{PI, TAU};

use rstar::{PointDistance, RTreeObject, AABB};
use serde::{Deserialize, Serialize};

use super::point::{BBox, Point};

/// A directed boundary edge. The region lies to its left.
///
/// `from` and `to` are vertex ids: ids below the sample size are sample indices, larger
/// ids name boundary vertices where two arcs cross away from any sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Edge {
    Segment {
        from: usize,
        to: usize,
        a: Point,
        b: Point,
    },
    /// Minor arc of the circle `(center, radius)` from `a` to `b`. The centre lies to the
    /// right of the chord, so the arc bulges into the region.
    Arc {
        from: usize,
        to: usize,
        a: Point,
        b: Point,
        center: Point,
        radius: f64,
    },
}

impl Edge {
    pub fn start(&self) -> Point {
        match *self {
            Edge::Segment { a, .. } | Edge::Arc { a, .. } => a,
        }
    }

    pub fn end(&self) -> Point {
        match *self {
            Edge::Segment { b, .. } | Edge::Arc { b, .. } => b,
        }
    }

    pub fn from_vertex(&self) -> usize {
        match *self {
            Edge::Segment { from, .. } | Edge::Arc { from, .. } => from,
        }
    }

    pub fn to_vertex(&self) -> usize {
        match *self {
            Edge::Segment { to, .. } | Edge::Arc { to, .. } => to,
        }
    }

    /// Start angle and signed sweep of an arc, measured at its centre.
    pub(crate) fn arc_angles(center: Point, a: Point, b: Point) -> (f64, f64) {
        let ta = (a - center).angle();
        let tb = (b - center).angle();
        let mut sweep = (tb - ta).rem_euclid(TAU);
        if sweep > PI {
            sweep -= TAU;
        }
        (ta, sweep)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Edge::Segment { a, b, .. } => a.dist(b),
            Edge::Arc {
                a, b, center, radius, ..
            } => radius * Edge::arc_angles(center, a, b).1.abs(),
        }
    }

    /// Point at parameter `t` in `[0, 1]`, uniform in arc length.
    pub fn point_at(&self, t: f64) -> Point {
        match *self {
            Edge::Segment { a, b, .. } => a + (b - a) * t,
            Edge::Arc {
                a, b, center, radius, ..
            } => {
                let (ta, sweep) = Edge::arc_angles(center, a, b);
                center + Point::from_angle(ta + t * sweep) * radius
            }
        }
    }

    /// Contribution to the signed enclosed area (Green's theorem).
    pub fn area_term(&self) -> f64 {
        match *self {
            Edge::Segment { a, b, .. } => 0.5 * a.cross(b),
            Edge::Arc {
                a, b, center, radius, ..
            } => {
                let w = Edge::arc_angles(center, a, b).1.abs();
                0.5 * a.cross(b) - 0.5 * radius * radius * (w - w.sin())
            }
        }
    }

    /// True when `x` lies in the open circular segment between the chord and the arc.
    pub fn in_segment(&self, x: Point) -> bool {
        match *self {
            Edge::Segment { .. } => false,
            Edge::Arc {
                a, b, center, radius, ..
            } => {
                if x.dist2(center) >= radius * radius {
                    return false;
                }
                let chord = b - a;
                // Arc side of the chord is the left side; the centre is on the right.
                chord.cross(x - a) > 0.0
            }
        }
    }

    pub fn distance(&self, x: Point) -> f64 {
        match *self {
            Edge::Segment { a, b, .. } => segment_distance(x, a, b),
            Edge::Arc {
                a, b, center, radius, ..
            } => {
                let v = x - center;
                let rho = v.norm();
                if rho == 0.0 {
                    return radius;
                }
                let (ta, sweep) = Edge::arc_angles(center, a, b);
                let rel = (v.angle() - ta).rem_euclid(TAU);
                let inside = if sweep >= 0.0 {
                    rel <= sweep
                } else {
                    rel == 0.0 || rel >= TAU + sweep
                };
                if inside {
                    (rho - radius).abs()
                } else {
                    x.dist(a).min(x.dist(b))
                }
            }
        }
    }

    /// Unit tangent leaving the start point.
    pub fn tangent_out(&self) -> Point {
        match *self {
            Edge::Segment { a, b, .. } => (b - a).normalized(),
            Edge::Arc { a, b, center, .. } => orient_tangent((a - center).perp(), b - a),
        }
    }

    /// Unit tangent arriving at the end point.
    pub fn tangent_in(&self) -> Point {
        match *self {
            Edge::Segment { a, b, .. } => (b - a).normalized(),
            Edge::Arc { a, b, center, .. } => orient_tangent((b - center).perp(), b - a),
        }
    }

    pub fn bbox(&self) -> BBox {
        let mut bb = BBox::new(self.start(), self.start());
        bb.include(self.end());
        if let Edge::Arc {
            a, b, center, radius, ..
        } = *self
        {
            let (ta, sweep) = Edge::arc_angles(center, a, b);
            for k in 0..4 {
                let axis = k as f64 * PI / 2.0;
                let rel = (axis - ta).rem_euclid(TAU);
                let hit = if sweep >= 0.0 {
                    rel <= sweep
                } else {
                    rel >= TAU + sweep
                };
                if hit {
                    bb.include(center + Point::from_angle(axis) * radius);
                }
            }
        }
        bb
    }

    /// Polyline approximation from start (inclusive) to end (exclusive) whose chords stay
    /// within `tol` of the arc.
    pub fn flatten(&self, tol: f64) -> Vec<Point> {
        match *self {
            Edge::Segment { a, .. } => vec![a],
            Edge::Arc {
                a, b, center, radius, ..
            } => {
                let (_, sweep) = Edge::arc_angles(center, a, b);
                let k = arc_pieces(radius, sweep.abs(), tol);
                let mut out = Vec::with_capacity(k);
                out.push(a);
                for s in 1..k {
                    out.push(self.point_at(s as f64 / k as f64));
                }
                out
            }
        }
    }

    pub fn reversed_tangent_in(&self) -> Point {
        -self.tangent_in()
    }
}

/// Number of chords so the sagitta of each stays below `tol`.
pub fn arc_pieces(radius: f64, sweep: f64, tol: f64) -> usize {
    if sweep <= 0.0 || tol <= 0.0 {
        return 1;
    }
    if tol >= radius {
        return 1;
    }
    let max_step = 2.0 * (1.0 - tol / radius).acos();
    ((sweep / max_step).ceil() as usize).clamp(1, 1 << 16)
}

fn orient_tangent(t: Point, along: Point) -> Point {
    let t = t.normalized();
    if t.dot(along) >= 0.0 {
        t
    } else {
        -t
    }
}

pub fn segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm2();
    if l2 == 0.0 {
        return x.dist(a);
    }
    let t = ((x - a).dot(ab) / l2).clamp(0.0, 1.0);
    x.dist(a + ab * t)
}

/// A closed boundary loop. Counter-clockwise loops are outer boundaries, clockwise ones
/// are holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loop {
    pub edges: Vec<Edge>,
}

impl Loop {
    pub fn signed_area(&self) -> f64 {
        self.edges.iter().map(Edge::area_term).sum()
    }

    pub fn length(&self) -> f64 {
        self.edges.iter().map(Edge::length).sum()
    }

    /// Winding number of the arc-bounded loop around `x`.
    pub fn winding_number(&self, x: Point) -> i32 {
        let mut w = 0;
        for e in &self.edges {
            let (a, b) = (e.start(), e.end());
            if a.y <= x.y {
                if b.y > x.y && (b - a).cross(x - a) > 0.0 {
                    w += 1;
                }
            } else if b.y <= x.y && (b - a).cross(x - a) < 0.0 {
                w -= 1;
            }
            if e.in_segment(x) {
                w -= 1;
            }
        }
        w
    }

    pub fn distance(&self, x: Point) -> f64 {
        self.edges
            .iter()
            .map(|e| e.distance(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> BBox {
        self.edges
            .iter()
            .map(Edge::bbox)
            .reduce(BBox::union)
            .expect("loop has edges")
    }

    /// Closed polyline (first vertex not repeated).
    pub fn flatten(&self, tol: f64) -> Vec<Point> {
        self.edges.iter().flat_map(|e| e.flatten(tol)).collect()
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().map(Edge::from_vertex)
    }
}

/// R-tree entry for nearest-edge queries.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeEntry {
    pub edge: Edge,
    envelope: AABB<[f64; 2]>,
}

impl EdgeEntry {
    pub fn new(edge: Edge) -> Self {
        let bb = edge.bbox();
        EdgeEntry {
            edge,
            envelope: AABB::from_corners(bb.min.to_array(), bb.max.to_array()),
        }
    }
}

impl RTreeObject for EdgeEntry {
    type Envelope = AABB<[f64; 2]>;
    fn envelope(&self) -> Self::Envelope {
        self.envelope
    }
}

impl PointDistance for EdgeEntry {
    fn distance_2(&self, point: &[f64; 2]) -> f64 {
        let d = self.edge.distance(Point::new(point[0], point[1]));
        d * d
    }
}
