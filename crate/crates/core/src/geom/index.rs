//! Delaunay triangulation, Voronoi cells and nearest-neighbour queries over a sample.

use rstar::primitives::GeomWithData;
use rstar::RTree;

use super::point::{BBox, Point, PointSet};
use crate::error::{Error, Result};

type Indexed = GeomWithData<[f64; 2], usize>;

/// Spatial index of a [`PointSet`]: Delaunay triangles, the Delaunay neighbour graph
/// (whose dual is the Voronoi diagram) and an R-tree for nearest-neighbour search.
#[derive(Debug)]
pub struct TriangulationIndex {
    points: PointSet,
    triangles: Vec<[usize; 3]>,
    neighbors: Vec<Vec<usize>>,
    collinear: bool,
    tree: RTree<Indexed>,
    scale: f64,
}

impl TriangulationIndex {
    pub fn new(points: PointSet) -> Result<Self> {
        let n = points.len();
        let pts = points.points();
        let dpts: Vec<delaunator::Point> = pts
            .iter()
            .map(|p| delaunator::Point { x: p.x, y: p.y })
            .collect();
        let tri = delaunator::triangulate(&dpts);

        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut triangles = Vec::with_capacity(tri.len());
        let collinear = tri.is_empty();
        if collinear {
            // All points on a line (or n < 3): neighbours are consecutive along the line.
            for w in tri.hull.windows(2) {
                neighbors[w[0]].push(w[1]);
                neighbors[w[1]].push(w[0]);
            }
        } else {
            let mut seen = vec![false; n];
            for t in tri.triangles.chunks_exact(3) {
                let (a, b, c) = (t[0], t[1], t[2]);
                let o = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
                triangles.push(if o > 0.0 { [a, b, c] } else { [a, c, b] });
                for (u, v) in [(a, b), (b, c), (c, a)] {
                    neighbors[u].push(v);
                    neighbors[v].push(u);
                    seen[u] = true;
                }
            }
            if let Some(i) = seen.iter().position(|s| !s) {
                return Err(Error::DegenerateTriangulation(i));
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }

        let tree = RTree::bulk_load(
            pts.iter()
                .enumerate()
                .map(|(i, p)| Indexed::new(p.to_array(), i))
                .collect(),
        );
        let scale = points.scale();
        Ok(TriangulationIndex {
            points,
            triangles,
            neighbors,
            collinear,
            tree,
            scale,
        })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points.get(i)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Counter-clockwise Delaunay triangles. Empty when the sample is collinear.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Delaunay neighbours of sample `i`, sorted by index.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// True when no triangle exists (n < 3 or all points on a line).
    pub fn is_collinear(&self) -> bool {
        self.collinear
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Nearest sample to `x`; ties go to the lowest index.
    pub fn nearest(&self, x: Point) -> (usize, f64) {
        let mut it = self.tree.nearest_neighbor_iter_with_distance_2(x.to_array());
        let (first, d2) = it.next().expect("index is non-empty");
        let mut best = first.data;
        for (p, e2) in it {
            if e2 > d2 {
                break;
            }
            best = best.min(p.data);
        }
        (best, d2.sqrt())
    }

    pub fn nearest_distance(&self, x: Point) -> f64 {
        self.nearest(x).1
    }

    /// Samples in increasing distance from `x`, lazily.
    pub fn nearest_iter(&self, x: Point) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.tree
            .nearest_neighbor_iter_with_distance_2(x.to_array())
            .map(|(p, d2)| (p.data, d2.sqrt()))
    }

    /// All samples strictly closer than `radius` to `x`.
    pub fn within(&self, x: Point, radius: f64) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .tree
            .locate_within_distance(x.to_array(), radius * radius)
            .filter(|p| x.dist2(Point::new(p.geom()[0], p.geom()[1])) < radius * radius)
            .map(|p| p.data)
            .collect();
        v.sort_unstable();
        v
    }

    /// Indices of every Voronoi cell containing `x` (several on cell boundaries).
    pub fn cells_containing(&self, x: Point) -> Vec<usize> {
        let (_, d) = self.nearest(x);
        let tol = 1e-12 * (d + self.scale);
        let mut v: Vec<usize> = self
            .nearest_iter(x)
            .take_while(|&(_, e)| e <= d + tol)
            .map(|(i, _)| i)
            .collect();
        v.sort_unstable();
        v
    }

    /// Circumcentres of the Delaunay triangles, i.e. the Voronoi vertices.
    pub fn voronoi_vertices(&self) -> Vec<Point> {
        self.triangles
            .iter()
            .map(|t| circumcenter(self.point(t[0]), self.point(t[1]), self.point(t[2])))
            .collect()
    }

    /// Sample bounding box inflated by `2 * r_max`.
    pub fn clip_box(&self, r_max: f64) -> BBox {
        self.points.bbox().inflate(2.0 * r_max)
    }

    /// Voronoi cell of sample `i` clipped to `bbox`, as a counter-clockwise polygon.
    pub fn voronoi_cell(&self, i: usize, bbox: BBox) -> Vec<Point> {
        let mut poly = vec![
            bbox.min,
            Point::new(bbox.max.x, bbox.min.y),
            bbox.max,
            Point::new(bbox.min.x, bbox.max.y),
        ];
        let p = self.point(i);
        for &j in &self.neighbors[i] {
            let q = self.point(j);
            let normal = q - p;
            let offset = normal.dot(p.midpoint(q));
            poly = clip_halfplane(&poly, normal, offset);
            if poly.is_empty() {
                break;
            }
        }
        poly
    }
}

/// Keeps the part of `poly` where `normal . x <= offset`.
fn clip_halfplane(poly: &[Point], normal: Point, offset: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let fa = normal.dot(a) - offset;
        let fb = normal.dot(b) - offset;
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let t = fa / (fa - fb);
            out.push(a + (b - a) * t);
        }
    }
    out
}

pub fn circumcenter(a: Point, b: Point, c: Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    let ux = (ac.y * ab.norm2() - ab.y * ac.norm2()) / d;
    let uy = (ab.x * ac.norm2() - ac.x * ab.norm2()) / d;
    a + Point::new(ux, uy)
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|k| poly[k].cross(poly[(k + 1) % n])).sum::<f64>() * 0.5
}

pub fn point_in_polygon(poly: &[Point], x: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > x.y) != (b.y > x.y) && x.x < (b.x - a.x) * (x.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}
