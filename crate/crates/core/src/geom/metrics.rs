//! Set distances: Hausdorff distance, boundary Hausdorff distance and distance in measure.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use super::hull::HullRegion;
use super::point::{BBox, Point};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// A compact planar set that can answer distance queries.
pub trait Shape: Sync {
    fn bbox(&self) -> BBox;
    fn contains(&self, x: Point) -> bool;
    /// Distance from `x` to the set; zero inside.
    fn distance(&self, x: Point) -> f64;
    /// Distance from `x` to the topological boundary.
    fn boundary_distance(&self, x: Point) -> f64;
    /// Boundary points no more than `step` apart along the boundary.
    fn boundary_samples(&self, step: f64) -> Vec<Point>;
    /// The set as a finite list of points, when it is one.
    fn finite_points(&self) -> Option<&[Point]> {
        None
    }
}

impl Shape for HullRegion {
    fn bbox(&self) -> BBox {
        HullRegion::bbox(self)
    }
    fn contains(&self, x: Point) -> bool {
        HullRegion::contains(self, x)
    }
    fn distance(&self, x: Point) -> f64 {
        HullRegion::distance(self, x)
    }
    fn boundary_distance(&self, x: Point) -> f64 {
        HullRegion::boundary_distance(self, x)
    }
    fn boundary_samples(&self, step: f64) -> Vec<Point> {
        HullRegion::boundary_samples(self, step)
    }
}

/// A finite point set with nearest-neighbour lookup.
pub struct PointCloud {
    points: Vec<Point>,
    tree: RTree<GeomWithData<[f64; 2], usize>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let tree = RTree::bulk_load(
            points
                .iter()
                .enumerate()
                .map(|(i, p)| GeomWithData::new(p.to_array(), i))
                .collect(),
        );
        Ok(PointCloud { points, tree })
    }
}

impl Shape for PointCloud {
    fn bbox(&self) -> BBox {
        BBox::of_points(&self.points).expect("non-empty")
    }
    fn contains(&self, x: Point) -> bool {
        self.distance(x) == 0.0
    }
    fn distance(&self, x: Point) -> f64 {
        let p = self
            .tree
            .nearest_neighbor(x.to_array())
            .expect("non-empty")
            .geom();
        x.dist(Point::new(p[0], p[1]))
    }
    fn boundary_distance(&self, x: Point) -> f64 {
        self.distance(x)
    }
    fn boundary_samples(&self, _step: f64) -> Vec<Point> {
        self.points.clone()
    }
    fn finite_points(&self) -> Option<&[Point]> {
        Some(&self.points)
    }
}

/// A distance together with a bound on its numerical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub error_bound: f64,
}

/// Default resolution: the joint bounding-box diagonal over 2048.
pub fn default_resolution(a: &dyn Shape, c: &dyn Shape) -> f64 {
    let d = a.bbox().union(c.bbox()).diagonal();
    if d > 0.0 {
        d / 2048.0
    } else {
        f64::MIN_POSITIVE
    }
}

struct Cell {
    center: Point,
    half: f64,
    upper: f64,
}

impl PartialEq for Cell {
    fn eq(&self, o: &Self) -> bool {
        self.upper == o.upper
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Cell {
    fn cmp(&self, o: &Self) -> Ordering {
        self.upper.total_cmp(&o.upper)
    }
}

/// `sup_{a in A} d(a, C)` by branch and bound over a quadtree on `A`'s bounding box.
///
/// `d(., C)` is 1-Lipschitz, so a square of half-diagonal `s` around `p` meeting `A`
/// is bounded above by `d(p, C) + s`, and `d(p, C) - d(p, A)` is always attained up to
/// a lower bound. The search stops when the gap drops below `tol`.
pub fn directed_hausdorff(a: &dyn Shape, c: &dyn Shape, tol: f64) -> Bounded {
    if let Some(pts) = a.finite_points() {
        let value = pts.iter().map(|&p| c.distance(p)).fold(0.0, f64::max);
        return Bounded {
            value,
            error_bound: 0.0,
        };
    }
    let mut best: f64 = a
        .boundary_samples(tol.max(a.bbox().diagonal() / 256.0))
        .into_iter()
        .map(|p| c.distance(p))
        .fold(0.0, f64::max);

    let bb = a.bbox();
    let side = bb.width().max(bb.height()).max(tol);
    let half = side * std::f64::consts::FRAC_1_SQRT_2 * 0.5;
    let mut heap = BinaryHeap::new();
    let push = |heap: &mut BinaryHeap<Cell>, best: &mut f64, center: Point, half: f64| {
        let da = a.distance(center);
        if da > half {
            return;
        }
        let dc = c.distance(center);
        *best = best.max(dc - da);
        // Inside C the cell is covered up to the distance from its centre to C's boundary.
        let upper = if dc == 0.0 {
            (half - c.boundary_distance(center)).max(0.0)
        } else {
            dc + half
        };
        heap.push(Cell {
            center,
            half,
            upper,
        });
    };
    push(&mut heap, &mut best, bb.center(), half);
    // The heap is ordered by upper bound, so the popped cell bounds every remaining one.
    let mut upper = best;
    while let Some(cell) = heap.pop() {
        if cell.upper - best <= tol {
            upper = cell.upper;
            break;
        }
        let q = cell.half / 2.0;
        let off = q * std::f64::consts::FRAC_1_SQRT_2;
        for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            push(&mut heap, &mut best, cell.center + Point::new(sx * off, sy * off), q);
        }
    }
    Bounded {
        value: best,
        error_bound: (upper - best).max(0.0),
    }
}

/// Hausdorff distance `max(sup_A d(., C), sup_C d(., A))` with its error bound.
pub fn hausdorff(a: &dyn Shape, c: &dyn Shape, tol: Option<f64>) -> Result<Bounded> {
    let tol = tol.unwrap_or_else(|| default_resolution(a, c));
    let ab = directed_hausdorff(a, c, tol);
    let ba = directed_hausdorff(c, a, tol);
    Ok(Bounded {
        value: ab.value.max(ba.value),
        error_bound: ab.error_bound.max(ba.error_bound),
    })
}

/// Hausdorff distance between boundaries, from boundary samples spaced `step` apart.
pub fn boundary_hausdorff(a: &dyn Shape, c: &dyn Shape, step: Option<f64>) -> Result<Bounded> {
    let step = step.unwrap_or_else(|| default_resolution(a, c));
    let dir = |x: &dyn Shape, y: &dyn Shape| {
        x.boundary_samples(step)
            .into_iter()
            .map(|p| y.boundary_distance(p))
            .fold(0.0, f64::max)
    };
    Ok(Bounded {
        value: dir(a, c).max(dir(c, a)),
        error_bound: step / 2.0,
    })
}

/// Monte Carlo estimate of a Lebesgue measure, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

const MC_CHUNK: usize = 4096;

/// `mu(A △ C)` by uniform sampling on the joint bounding box. Deterministic for a seed:
/// the draws are split into fixed chunks, each with its own derived stream.
pub fn distance_in_measure(
    a: &dyn Shape,
    c: &dyn Shape,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate> {
    if samples == 0 {
        return Err(Error::InvalidConfig("sample budget must be positive".into()));
    }
    let bb = a.bbox().union(c.bbox());
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, k as u64));
            let m = MC_CHUNK.min(samples - k * MC_CHUNK);
            (0..m)
                .filter(|_| {
                    let x = Point::new(
                        bb.min.x + rng.random::<f64>() * bb.width(),
                        bb.min.y + rng.random::<f64>() * bb.height(),
                    );
                    a.contains(x) != c.contains(x)
                })
                .count()
        })
        .sum();
    let p = hits as f64 / samples as f64;
    let area = bb.area();
    Ok(MeasureEstimate {
        value: area * p,
        std_error: area * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Disc used only in these tests.
    struct Disc(Point, f64);

    impl Shape for Disc {
        fn bbox(&self) -> BBox {
            BBox::new(self.0, self.0).inflate(self.1)
        }
        fn contains(&self, x: Point) -> bool {
            x.dist(self.0) <= self.1
        }
        fn distance(&self, x: Point) -> f64 {
            (x.dist(self.0) - self.1).max(0.0)
        }
        fn boundary_distance(&self, x: Point) -> f64 {
            (x.dist(self.0) - self.1).abs()
        }
        fn boundary_samples(&self, step: f64) -> Vec<Point> {
            let k = ((std::f64::consts::TAU * self.1 / step).ceil() as usize).max(8);
            (0..k)
                .map(|i| self.0 + Point::from_angle(i as f64 * std::f64::consts::TAU / k as f64) * self.1)
                .collect()
        }
    }

    #[test]
    fn single_points_are_five_apart() {
        let a = PointCloud::new(vec![Point::new(0.0, 0.0)]).unwrap();
        let c = PointCloud::new(vec![Point::new(3.0, 4.0)]).unwrap();
        assert_eq!(hausdorff(&a, &c, None).unwrap().value, 5.0);
    }

    #[test]
    fn concentric_discs() {
        let a = Disc(Point::new(0.0, 0.0), 1.0);
        let c = Disc(Point::new(0.0, 0.0), 0.5);
        let h = hausdorff(&a, &c, Some(1e-4)).unwrap();
        assert!((h.value - 0.5).abs() <= h.error_bound + 1e-12, "{h:?}");
        assert!(h.error_bound <= 1e-4);
        let same = hausdorff(&a, &a, Some(1e-4)).unwrap();
        assert!(same.value <= 1e-4);

        let m = distance_in_measure(&a, &c, 200_000, 7).unwrap();
        let exact = std::f64::consts::PI * 0.75;
        assert!((m.value - exact).abs() < 3.0 * m.std_error, "{m:?}");
        let zero = distance_in_measure(&a, &a, 10_000, 7).unwrap();
        assert_eq!(zero.value, 0.0);

        let b = boundary_hausdorff(&a, &c, Some(1e-3)).unwrap();
        assert!((b.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn measure_is_deterministic_per_seed() {
        let a = Disc(Point::new(0.0, 0.0), 1.0);
        let c = Disc(Point::new(0.3, 0.0), 1.0);
        let x = distance_in_measure(&a, &c, 50_000, 11).unwrap();
        let y = distance_in_measure(&a, &c, 50_000, 11).unwrap();
        assert_eq!(x, y);
    }
}
