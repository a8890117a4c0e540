#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhull::{Point, PointSet};

pub fn uniform_square(n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointSet::new((0..n).map(|_| Point::new(rng.random(), rng.random())).collect()).unwrap()
}

pub fn uniform_disc(n: usize, center: Point, radius: f64, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Point::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0);
        if p.norm2() <= 1.0 {
            out.push(center + p * radius);
        }
    }
    out
}

/// Squared Euclidean distance transform of a binary mask (distance in cells to the
/// nearest set cell), by the two-pass lower-envelope method.
pub fn edt(mask: &[bool], w: usize, h: usize) -> Vec<f64> {
    const INF: f64 = 1e20;
    fn pass(f: &[f64], out: &mut [f64]) {
        let n = f.len();
        let mut v = vec![0usize; n];
        let mut z = vec![0.0f64; n + 1];
        let mut k = 0usize;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in 1..n {
            let mut s;
            loop {
                let p = v[k];
                s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                // z[0] is -inf, so k never underflows.
                if s <= z[k] {
                    k -= 1;
                } else {
                    break;
                }
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
        }
        k = 0;
        for q in 0..n {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            out[q] = (q as f64 - p as f64).powi(2) + f[p];
        }
    }
    let mut g = vec![0.0; w * h];
    let mut col = vec![0.0; h];
    let mut tmp = vec![0.0; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = if mask[y * w + x] { 0.0 } else { INF };
        }
        pass(&col, &mut tmp);
        for y in 0..h {
            g[y * w + x] = tmp[y];
        }
    }
    let mut out = vec![0.0; w * h];
    let mut row = vec![0.0; w];
    for y in 0..h {
        pass(&g[y * w..(y + 1) * w], &mut row);
        out[y * w..(y + 1) * w].copy_from_slice(&row);
    }
    out
}

/// Rasterized `C_r` on a square grid: cell centres at distance at least `r` from every
/// sample are free ball centres; a cell lies outside `C_r` when a free centre is closer
/// than `r`.
pub struct RasterHull {
    pub min: Point,
    pub cell: f64,
    pub side: usize,
    pub inside: Vec<bool>,
}

impl RasterHull {
    pub fn new(points: &[Point], r: f64, lo: Point, hi: Point, side: usize) -> Self {
        let span = (hi.x - lo.x).max(hi.y - lo.y);
        let cell = span / side as f64;
        let centre = |i: usize, j: usize| Point::new(lo.x + (i as f64 + 0.5) * cell, lo.y + (j as f64 + 0.5) * cell);
        let free: Vec<bool> = (0..side * side)
            .map(|k| {
                let c = centre(k % side, k / side);
                points.iter().all(|p| p.dist2(c) >= r * r)
            })
            .collect();
        let d2 = edt(&free, side, side);
        let rr = (r / cell).powi(2);
        let inside = d2.iter().map(|&d| d >= rr).collect();
        RasterHull { min: lo, cell, side, inside }
    }

    pub fn centre(&self, k: usize) -> Point {
        Point::new(
            self.min.x + ((k % self.side) as f64 + 0.5) * self.cell,
            self.min.y + ((k / self.side) as f64 + 0.5) * self.cell,
        )
    }

    /// Cells with a 4-neighbour of the other label.
    pub fn boundary_cells(&self) -> usize {
        let s = self.side;
        (0..s * s)
            .filter(|&k| {
                let (i, j) = (k % s, k / s);
                let v = self.inside[k];
                (i > 0 && self.inside[k - 1] != v)
                    || (i + 1 < s && self.inside[k + 1] != v)
                    || (j > 0 && self.inside[k - s] != v)
                    || (j + 1 < s && self.inside[k + s] != v)
            })
            .count()
    }
}
