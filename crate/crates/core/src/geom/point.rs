use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point::new(c, s)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point) -> f64 {
        (self - o).norm2()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Counter-clockwise normal.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn midpoint(self, o: Point) -> Point {
        Point::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn new(min: Point, max: Point) -> Self {
        BBox { min, max }
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point>) -> Option<BBox> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        let mut b = BBox::new(first, first);
        for p in it {
            b.include(*p);
        }
        Some(b)
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(self, o: BBox) -> BBox {
        let mut b = self;
        b.include(o.min);
        b.include(o.max);
        b
    }

    pub fn inflate(self, by: f64) -> BBox {
        BBox::new(
            Point::new(self.min.x - by, self.min.y - by),
            Point::new(self.max.x + by, self.max.y + by),
        )
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Point {
        self.min.midpoint(self.max)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Distance from `p` to the box (zero inside).
    pub fn distance(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }
}

/// An immutable planar sample. Coordinates are finite and pairwise distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            let (p, q) = (points[a], points[b]);
            p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y))
        });
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::DuplicatePoints(a, b));
            }
        }
        Ok(PointSet { points })
    }

    pub fn from_xy(xy: &[(f64, f64)]) -> Result<Self> {
        PointSet::new(xy.iter().map(|&p| p.into()).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.points.iter()
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.points).expect("point set is non-empty")
    }

    /// Largest pairwise distance. Computed on the convex hull vertices.
    pub fn diameter(&self) -> f64 {
        let hull = super::hull::convex_hull_indices(&self.points);
        let mut d: f64 = 0.0;
        for (k, &i) in hull.iter().enumerate() {
            for &j in &hull[k + 1..] {
                d = d.max(self.points[i].dist(self.points[j]));
            }
        }
        d
    }

    /// Characteristic length used for relative tolerances.
    pub fn scale(&self) -> f64 {
        let b = self.bbox();
        let s = b.diagonal();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// SHA-256 over the little-endian coordinate bits, in input order.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.points {
            h.update(p.x.to_bits().to_le_bytes());
            h.update(p.y.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

impl TryFrom<Vec<Point>> for PointSet {
    type Error = Error;
    fn try_from(v: Vec<Point>) -> Result<Self> {
        PointSet::new(v)
    }
}

impl From<PointSet> for Vec<Point> {
    fn from(p: PointSet) -> Self {
        p.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_exact_duplicates() {
        let err = PointSet::from_xy(&[(0.0, 0.0), (1.0, 2.0), (0.0, 0.0)]).unwrap_err();
        assert_eq!(err, Error::DuplicatePoints(0, 2));
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert_eq!(PointSet::new(vec![]).unwrap_err(), Error::EmptyPointSet);
        assert_eq!(
            PointSet::from_xy(&[(0.0, 0.0), (f64::NAN, 1.0)]).unwrap_err(),
            Error::NonFinite(1)
        );
    }

    #[test]
    fn diameter_of_square() {
        let ps = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0), (0.5, 0.5)])
            .unwrap();
        assert!((ps.diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hash_depends_on_order() {
        let a = PointSet::from_xy(&[(0.0, 0.0), (1.0, 0.0)]).unwrap();
        let b = PointSet::from_xy(&[(1.0, 0.0), (0.0, 0.0)]).unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
        assert_eq!(a.content_hash(), a.clone().content_hash());
    }
}
