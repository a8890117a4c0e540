//! r-convex hulls and convex hulls of a sample.
//!
//! The r-convex hull `C_r` is the complement of the union of all open radius-`r` balls
//! that miss the sample. Writing `F = { c : d(c, X) >= r }` for the set of admissible ball
//! centres, `C_r = { x : d(x, F) >= r }` and for `x` in `C_r` the distance to the boundary
//! is `d(x, F) - r`. The boundary of `F` is made of the arcs `circle(X_i, r) ∩ Vor(X_i)`,
//! which is what [`FreeSet`] stores. The boundary of `C_r` is made of radius-`r` arcs
//! centred at the corners of `F` (where two such arcs meet on a Voronoi edge) and joining
//! the two samples that define the corner.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::TAU;
use std::sync::{Arc, OnceLock};

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use super::arcs::CellArcs;
use super::edge::{Edge, EdgeEntry, Loop};
use super::index::TriangulationIndex;
use super::point::{BBox, Point, PointSet};
use crate::error::{Error, Result};

type Indexed = GeomWithData<[f64; 2], usize>;

/// Relative tolerance (times the sample scale) for boundary membership.
const BOUNDARY_TOL: f64 = 1e-10;

/// Admissible centres of empty radius-`r` balls, represented by their boundary arcs.
#[derive(Debug)]
pub struct FreeSet {
    radius: f64,
    arcs: Vec<CellArcs>,
    tree: RTree<Indexed>,
}

impl FreeSet {
    fn build(index: &TriangulationIndex, radius: f64) -> FreeSet {
        let arcs: Vec<CellArcs> = (0..index.len())
            .map(|i| CellArcs::compute(index, i, radius))
            .filter(|a| !a.is_empty())
            .collect();
        let tree = RTree::bulk_load(
            arcs.iter()
                .enumerate()
                .map(|(k, a)| Indexed::new(a.center.to_array(), k))
                .collect(),
        );
        FreeSet { radius, arcs, tree }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Sites whose circle keeps a non-empty arc: the samples on the hull boundary.
    pub fn extreme_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.arcs.iter().map(|a| a.site)
    }

    pub fn cell_arcs(&self) -> &[CellArcs] {
        &self.arcs
    }

    /// `d(x, F)`, abandoning the search once the running minimum drops below `stop_below`.
    fn distance_bounded(&self, index: &TriangulationIndex, x: Point, stop_below: f64) -> f64 {
        if index.nearest_distance(x) >= self.radius {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for (k, d2) in self.tree.nearest_neighbor_iter_with_distance_2(x.to_array()) {
            if d2.sqrt() - self.radius >= best {
                break;
            }
            best = best.min(self.arcs[k.data].distance(x));
            if best < stop_below {
                break;
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    RConvex,
    ConvexHull,
}

/// One connected component of a hull region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Component {
    /// Counter-clockwise boundary loops. More than one when lobes touch at a sample point.
    pub outer: Vec<Loop>,
    /// Clockwise loops bounding holes.
    pub holes: Vec<Loop>,
    /// Set when the component is a single sample point.
    pub isolated: Option<usize>,
    pub area: f64,
    /// Sample indices on the boundary, sorted.
    pub samples: Vec<usize>,
}

impl Component {
    pub fn boundary_samples(&self) -> &[usize] {
        &self.samples
    }

    pub fn loops(&self) -> impl Iterator<Item = &Loop> {
        self.outer.iter().chain(&self.holes)
    }
}

/// An r-convex hull (finite `radius`) or the convex hull (`radius = +inf`) of a sample.
#[derive(Debug)]
pub struct HullRegion {
    radius: f64,
    kind: RegionKind,
    index: Arc<TriangulationIndex>,
    components: Vec<Component>,
    free: Option<FreeSet>,
    convex: Vec<Point>,
    edge_tree: RTree<EdgeEntry>,
    isolated: Vec<usize>,
    tol: f64,
    labels: OnceLock<Vec<usize>>,
}

/// Builds the spatial index for a sample.
pub fn build_index(points: PointSet) -> Result<Arc<TriangulationIndex>> {
    TriangulationIndex::new(points).map(Arc::new)
}

/// r-convex hull `C_r(X_n)`.
pub fn r_convex_hull(index: &Arc<TriangulationIndex>, r: f64) -> Result<HullRegion> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidRadius(r));
    }
    let free = FreeSet::build(index, r);
    let edges = boundary_arcs(index, &free);
    let loops = link_loops(&edges);

    let mut touched = vec![false; index.len()];
    for e in &edges {
        for v in [e.from_vertex(), e.to_vertex()] {
            if v < touched.len() {
                touched[v] = true;
            }
        }
    }
    let isolated: Vec<usize> = free.extreme_sites().filter(|&i| !touched[i]).collect();

    Ok(HullRegion::assemble(
        index.clone(),
        r,
        RegionKind::RConvex,
        loops,
        isolated,
        Some(free),
        Vec::new(),
    ))
}

/// Convex hull `H(X_n)` as a region with straight edges.
pub fn convex_hull(index: &Arc<TriangulationIndex>) -> HullRegion {
    let pts = index.points().points();
    let hull = convex_hull_indices(pts);
    let seg = |i: usize, j: usize| Edge::Segment {
        from: i,
        to: j,
        a: pts[i],
        b: pts[j],
    };
    let (loops, isolated) = match hull.len() {
        1 => (Vec::new(), vec![hull[0]]),
        2 => (
            vec![Loop {
                edges: vec![seg(hull[0], hull[1]), seg(hull[1], hull[0])],
            }],
            Vec::new(),
        ),
        m => (
            vec![Loop {
                edges: (0..m).map(|k| seg(hull[k], hull[(k + 1) % m])).collect(),
            }],
            Vec::new(),
        ),
    };
    let convex = hull.iter().map(|&i| pts[i]).collect();
    HullRegion::assemble(
        index.clone(),
        f64::INFINITY,
        RegionKind::ConvexHull,
        loops,
        isolated,
        None,
        convex,
    )
}

/// Indices of the convex hull vertices in counter-clockwise order (collinear points dropped).
pub fn convex_hull_indices(pts: &[Point]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| {
        pts[a]
            .x
            .total_cmp(&pts[b].x)
            .then(pts[a].y.total_cmp(&pts[b].y))
    });
    order.dedup_by(|a, b| pts[*a] == pts[*b]);
    if order.len() <= 2 {
        return order;
    }
    let turn = |o: usize, a: usize, b: usize| (pts[a] - pts[o]).cross(pts[b] - pts[o]);
    let mut lower: Vec<usize> = Vec::new();
    for &i in &order {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= 0.0 {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in order.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= 0.0 {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// A corner of the free set: the centre of an empty ball touching samples `i < j`.
#[derive(Clone)]
struct Corner {
    pos: Point,
    i: usize,
    j: usize,
}

/// Boundary arcs of the hull.
///
/// Each corner `c` of the free set contributes the radius-`r` arc of `circle(c)` between
/// its two samples, minus the parts that lie inside another empty ball. Coverage can only
/// change where the arc crosses the circle of another corner, so the arc is split there
/// and each piece is tested at its midpoint. Crossing points become boundary vertices
/// with ids from `n` upward.
/// Corners closer than `same` are one empty ball touching three or more samples. Its
/// boundary joins those samples in angular order around the ball, so pairs that are not
/// neighbours in that order are dropped and missing neighbour pairs are added.
fn merge_coincident(index: &TriangulationIndex, corners: Vec<Corner>, same: f64) -> Vec<Corner> {
    let tree: RTree<Indexed> = RTree::bulk_load(
        corners
            .iter()
            .enumerate()
            .map(|(k, c)| Indexed::new(c.pos.to_array(), k))
            .collect(),
    );
    let mut cluster: Vec<usize> = (0..corners.len()).collect();
    fn root(cluster: &mut [usize], mut k: usize) -> usize {
        while cluster[k] != k {
            cluster[k] = cluster[cluster[k]];
            k = cluster[k];
        }
        k
    }
    for (k, c) in corners.iter().enumerate() {
        for other in tree.locate_within_distance(c.pos.to_array(), same * same) {
            let (a, b) = (root(&mut cluster, k), root(&mut cluster, other.data));
            if a != b {
                cluster[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..corners.len() {
        let g = root(&mut cluster, k);
        groups.entry(g).or_default().push(k);
    }

    let mut out = Vec::with_capacity(corners.len());
    for members in groups.into_values() {
        let mut sites: Vec<usize> = members.iter().flat_map(|&k| [corners[k].i, corners[k].j]).collect();
        sites.sort_unstable();
        sites.dedup();
        if sites.len() <= 2 {
            out.extend(members.iter().map(|&k| corners[k].clone()));
            continue;
        }
        let centre = corners[members[0]].pos;
        let angle = |s: usize| (index.point(s) - centre).angle();
        sites.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
        // The widest angular gap faces the free side of the ball and is not an edge.
        let m = sites.len();
        let gap = |k: usize| (angle(sites[(k + 1) % m]) - angle(sites[k])).rem_euclid(TAU);
        let widest = (0..m).max_by(|&a, &b| gap(a).total_cmp(&gap(b))).unwrap_or(0);
        for k in (0..m).filter(|&k| k != widest) {
            let (a, b) = (sites[k], sites[(k + 1) % m]);
            out.push(Corner {
                pos: centre,
                i: a.min(b),
                j: a.max(b),
            });
        }
    }
    out.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)).then(a.pos.x.total_cmp(&b.pos.x)).then(a.pos.y.total_cmp(&b.pos.y)));
    out
}

fn boundary_arcs(index: &TriangulationIndex, free: &FreeSet) -> Vec<Edge> {
    let r = free.radius;
    let n = index.len();
    let scale = index.scale();
    // A corner is seen from both of its samples; near-degenerate input can make it
    // numerically visible from only one, so both are collected and deduplicated by the
    // pair and the side of the chord it lies on.
    let mut seen: HashMap<(usize, usize, bool), Point> = HashMap::new();
    for cell in free.cell_arcs() {
        let i = cell.site;
        for iv in &cell.intervals {
            for (theta, j) in [(iv.start, iv.start_neighbor), (iv.end, iv.end_neighbor)] {
                if j == super::arcs::NO_NEIGHBOR {
                    continue;
                }
                let (lo, hi) = (i.min(j), i.max(j));
                let pos = cell.point_at(theta);
                let (p, q) = (index.point(lo), index.point(hi));
                let side = (q - p).cross(pos - p) > 0.0;
                seen.entry((lo, hi, side)).or_insert(pos);
            }
        }
    }
    let mut keys: Vec<(usize, usize, bool)> = seen.keys().copied().collect();
    keys.sort_unstable();
    let corners = merge_coincident(
        index,
        keys.into_iter()
            .map(|(i, j, side)| Corner {
                pos: seen[&(i, j, side)],
                i,
                j,
            })
            .collect(),
        1e-12 * scale,
    );
    let mut thin: HashMap<(usize, usize), usize> = HashMap::new();
    for c in &corners {
        *thin.entry((c.i, c.j)).or_default() += 1;
    }
    let tree: RTree<Indexed> = RTree::bulk_load(
        corners
            .iter()
            .enumerate()
            .map(|(k, c)| Indexed::new(c.pos.to_array(), k))
            .collect(),
    );

    // Canonical crossing point of the circles around corners `lo < hi`, on the left
    // (`left = true`) or right of the direction lo -> hi.
    let crossing = |lo: usize, hi: usize, left: bool| -> Point {
        let (c, d) = (corners[lo].pos, corners[hi].pos);
        let v = d - c;
        let h = (v.norm() / (2.0 * r)).min(1.0).acos();
        let phi = v.angle() + if left { h } else { -h };
        c + Point::from_angle(phi) * r
    };
    let mut crossing_ids: HashMap<(usize, usize, bool), usize> = HashMap::new();
    let tol = 1e-9 * scale + 1e-12 * r;
    let limit = r - tol;
    let same = 1e-12 * scale;

    let mut out = Vec::new();
    for (k, corner) in corners.iter().enumerate() {
        // Empty balls on both sides of the chord: the arc lies inside the other ball.
        if thin[&(corner.i, corner.j)] >= 2 {
            continue;
        }
        let c = corner.pos;
        let (p, q) = (index.point(corner.i), index.point(corner.j));
        let (from, to, a, b) = if (q - p).cross(c - p) < 0.0 {
            (corner.i, corner.j, p, q)
        } else {
            (corner.j, corner.i, q, p)
        };
        let raw = Edge::Arc {
            from,
            to,
            a,
            b,
            center: c,
            radius: r,
        };
        let (ta, sweep) = Edge::arc_angles(c, a, b);
        let param = |psi: f64| -> f64 {
            if sweep >= 0.0 {
                (psi - ta).rem_euclid(TAU) / sweep
            } else {
                (ta - psi).rem_euclid(TAU) / -sweep
            }
        };

        // (t, vertex id, position) of every crossing strictly inside the arc.
        let mut cuts: Vec<(f64, usize, Point)> = Vec::new();
        for other in tree.locate_within_distance(c.to_array(), 4.0 * r * r) {
            let m = other.data;
            let v = corners[m].pos - c;
            let dist = v.norm();
            if m == k || dist <= same || dist >= 2.0 * r {
                continue;
            }
            let h = (dist / (2.0 * r)).acos();
            for left in [true, false] {
                let psi = v.angle() + if left { h } else { -h };
                let t = param(psi);
                if !(t > 1e-9 && t < 1.0 - 1e-9) {
                    continue;
                }
                let (lo, hi, side) = if k < m { (k, m, left) } else { (m, k, !left) };
                let next = n + crossing_ids.len();
                let id = *crossing_ids.entry((lo, hi, side)).or_insert(next);
                cuts.push((t, id, crossing(lo, hi, side)));
            }
        }
        cuts.sort_by(|x, y| x.0.total_cmp(&y.0));

        let mut knots = Vec::with_capacity(cuts.len() + 2);
        knots.push((0.0, from, a));
        knots.extend(cuts);
        knots.push((1.0, to, b));
        let mut run: Option<(usize, Point)> = None;
        for w in knots.windows(2) {
            let mid = raw.point_at(0.5 * (w[0].0 + w[1].0));
            let keep = free.distance_bounded(index, mid, limit) >= limit;
            match (keep, run) {
                (true, None) => run = Some((w[0].1, w[0].2)),
                (false, Some((v, pos))) => {
                    out.push(Edge::Arc {
                        from: v,
                        to: w[0].1,
                        a: pos,
                        b: w[0].2,
                        center: c,
                        radius: r,
                    });
                    run = None;
                }
                _ => {}
            }
        }
        if let Some((v, pos)) = run {
            out.push(Edge::Arc {
                from: v,
                to,
                a: pos,
                b,
                center: c,
                radius: r,
            });
        }
    }
    out
}

/// Links directed edges into closed loops, keeping the region on the left at pinch vertices.
fn link_loops(edges: &[Edge]) -> Vec<Loop> {
    let mut outgoing: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, e) in edges.iter().enumerate() {
        outgoing.entry(e.from_vertex()).or_default().push(k);
    }
    let next_of = |k: usize| -> Option<usize> {
        let e = &edges[k];
        let cands = outgoing.get(&e.to_vertex())?;
        let back = e.reversed_tangent_in().angle();
        cands
            .iter()
            .copied()
            .min_by(|&u, &v| {
                let cw = |m: usize| {
                    let t = (back - edges[m].tangent_out().angle()).rem_euclid(TAU);
                    if t <= 0.0 {
                        TAU
                    } else {
                        t
                    }
                };
                cw(u).total_cmp(&cw(v)).then(u.cmp(&v))
            })
    };

    let mut used = vec![false; edges.len()];
    let mut loops = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let mut chain = Vec::new();
        let mut k = start;
        loop {
            used[k] = true;
            chain.push(edges[k]);
            match next_of(k) {
                Some(n) if n == start => break,
                Some(n) if !used[n] => k = n,
                _ => break,
            }
        }
        loops.push(Loop { edges: chain });
    }
    loops
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl HullRegion {
    fn assemble(
        index: Arc<TriangulationIndex>,
        radius: f64,
        kind: RegionKind,
        loops: Vec<Loop>,
        isolated: Vec<usize>,
        free: Option<FreeSet>,
        convex: Vec<Point>,
    ) -> HullRegion {
        let areas: Vec<f64> = loops.iter().map(Loop::signed_area).collect();
        // Loops that enclose positive area are outer boundaries. Two-edge degenerate loops
        // (a segment hull) count as outer too.
        let is_outer: Vec<bool> = loops
            .iter()
            .zip(&areas)
            .map(|(l, &a)| a > 0.0 || l.edges.len() <= 2)
            .collect();

        let mut uf = UnionFind::new(loops.len());
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for (k, l) in loops.iter().enumerate() {
            for v in l.vertices() {
                if let Some(&o) = owner.get(&v) {
                    uf.union(o, k);
                } else {
                    owner.insert(v, k);
                }
            }
        }
        for (h, hole) in loops.iter().enumerate() {
            if is_outer[h] {
                continue;
            }
            let probe = hole.edges[0].point_at(0.5);
            let host = (0..loops.len())
                .filter(|&k| is_outer[k] && k != h)
                .filter(|&k| loops[k].winding_number(probe) != 0)
                .min_by(|&a, &b| areas[a].total_cmp(&areas[b]));
            if let Some(k) = host {
                uf.union(h, k);
            }
        }

        let groups: Vec<usize> = (0..loops.len()).map(|k| uf.find(k)).collect();
        let mut roots: Vec<usize> = groups.clone();
        roots.sort_unstable();
        roots.dedup();
        let mut components: Vec<Component> = roots
            .iter()
            .map(|_| Component {
                outer: Vec::new(),
                holes: Vec::new(),
                isolated: None,
                area: 0.0,
                samples: Vec::new(),
            })
            .collect();
        for (k, l) in loops.into_iter().enumerate() {
            let c = roots.binary_search(&groups[k]).expect("root present");
            components[c].area += areas[k];
            if is_outer[k] {
                components[c].outer.push(l);
            } else {
                components[c].holes.push(l);
            }
        }
        let n = index.len();
        for comp in &mut components {
            let mut v: Vec<usize> = comp
                .loops()
                .flat_map(|l| l.vertices())
                .filter(|&v| v < n)
                .collect();
            v.sort_unstable();
            v.dedup();
            comp.samples = v;
        }
        components.extend(isolated.iter().map(|&i| Component {
            outer: Vec::new(),
            holes: Vec::new(),
            isolated: Some(i),
            area: 0.0,
            samples: vec![i],
        }));
        // Stable order: by smallest boundary sample index, then by position.
        components.sort_by(|x, y| {
            let key = |c: &Component| {
                let first = c.samples.first().copied().unwrap_or(usize::MAX);
                let corner = c.loops().next().map_or(0.0, |l| l.bbox().min.x);
                (first, corner)
            };
            let (kx, ky) = (key(x), key(y));
            kx.0.cmp(&ky.0).then(kx.1.total_cmp(&ky.1))
        });

        let entries: Vec<EdgeEntry> = components
            .iter()
            .flat_map(|c| c.loops().flat_map(|l| l.edges.iter().copied()))
            .map(EdgeEntry::new)
            .collect();
        let tol = BOUNDARY_TOL * index.scale();
        HullRegion {
            radius,
            kind,
            index,
            components,
            free,
            convex,
            edge_tree: RTree::bulk_load(entries),
            isolated,
            tol,
            labels: OnceLock::new(),
        }
    }

    /// `+inf` for the convex hull.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kind(&self) -> RegionKind {
        self.kind
    }

    pub fn is_convex_hull(&self) -> bool {
        self.kind == RegionKind::ConvexHull
    }

    pub fn index(&self) -> &Arc<TriangulationIndex> {
        &self.index
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn free_set(&self) -> Option<&FreeSet> {
        self.free.as_ref()
    }

    /// Exact area: shoelace over chords minus the circular segments cut by the arcs.
    pub fn area(&self) -> f64 {
        self.components.iter().map(|c| c.area).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.edges().map(|e| e.length()).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.components
            .iter()
            .flat_map(|c| c.loops().flat_map(|l| l.edges.iter()))
    }

    pub fn isolated_points(&self) -> &[usize] {
        &self.isolated
    }

    pub fn bbox(&self) -> BBox {
        let pts = self.index.points().points();
        self.components
            .iter()
            .flat_map(|c| c.boundary_samples().iter())
            .map(|&i| BBox::new(pts[i], pts[i]))
            .chain(self.edges().map(Edge::bbox))
            .reduce(BBox::union)
            .expect("region is non-empty")
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Distance from `x` to the boundary, computed from the boundary edges and isolated points.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        let e = self
            .edge_tree
            .nearest_neighbor(x.to_array())
            .map(|e| e.edge.distance(x))
            .unwrap_or(f64::INFINITY);
        let p = self
            .isolated
            .iter()
            .map(|&i| x.dist(self.index.point(i)))
            .fold(f64::INFINITY, f64::min);
        e.min(p)
    }

    fn inside_by_loops(&self, x: Point) -> bool {
        self.components.iter().any(|c| {
            let w: i32 = c.loops().map(|l| l.winding_number(x)).sum();
            w != 0
        })
    }

    pub fn contains(&self, x: Point) -> bool {
        match &self.free {
            Some(free) => {
                let limit = self.radius - self.tol;
                free.distance_bounded(&self.index, x, limit) >= limit
            }
            None => self.inside_by_loops(x) || self.boundary_distance(x) <= self.tol,
        }
    }

    /// Distance to the boundary: positive inside, negative outside, zero on it.
    pub fn signed_distance(&self, x: Point) -> f64 {
        match &self.free {
            Some(free) => {
                let d = free.distance_bounded(&self.index, x, f64::NEG_INFINITY) - self.radius;
                if d >= -self.tol {
                    d.max(0.0)
                } else {
                    -self.boundary_distance(x)
                }
            }
            None => {
                let d = self.boundary_distance(x);
                if self.inside_by_loops(x) || d <= self.tol {
                    d
                } else {
                    -d
                }
            }
        }
    }

    /// Distance to the boundary when `x` lies in the region, `None` otherwise.
    pub fn inside_depth(&self, x: Point) -> Option<f64> {
        match &self.free {
            Some(free) => {
                let limit = self.radius - self.tol;
                let d = free.distance_bounded(&self.index, x, limit);
                (d >= limit).then(|| (d - self.radius).max(0.0))
            }
            None => {
                let d = self.signed_distance(x);
                (d >= 0.0).then_some(d)
            }
        }
    }

    /// Same as [`signed_distance`](Self::signed_distance) but computed only from the
    /// boundary loops. Independent of the free-set route; used as a cross-check.
    pub fn signed_distance_by_loops(&self, x: Point) -> f64 {
        let d = self.boundary_distance(x);
        if self.inside_by_loops(x) || d <= self.tol {
            d
        } else {
            -d
        }
    }

    /// Distance from `x` to the region (zero inside).
    pub fn distance(&self, x: Point) -> f64 {
        if self.contains(x) {
            0.0
        } else {
            self.boundary_distance(x)
        }
    }

    /// Component label of every sample point.
    pub fn labels(&self) -> &[usize] {
        self.labels.get_or_init(|| self.compute_labels())
    }

    fn compute_labels(&self) -> Vec<usize> {
        let n = self.index.len();
        let mut labels = vec![usize::MAX; n];
        for (c, comp) in self.components.iter().enumerate() {
            for &i in comp.boundary_samples() {
                labels[i] = c;
            }
        }
        let outers: Vec<(usize, &Loop, f64, BBox)> = self
            .components
            .iter()
            .enumerate()
            .flat_map(|(c, comp)| comp.outer.iter().map(move |l| (c, l)))
            .map(|(c, l)| (c, l, l.signed_area(), l.bbox()))
            .collect();
        for (i, label) in labels.iter_mut().enumerate() {
            if *label != usize::MAX {
                continue;
            }
            let x = self.index.point(i);
            *label = outers
                .iter()
                .filter(|(_, _, _, bb)| bb.contains(x))
                .filter(|(_, l, _, _)| l.winding_number(x) != 0)
                .min_by(|a, b| a.2.total_cmp(&b.2))
                .map(|o| o.0)
                .unwrap_or_else(|| {
                    // Numerically on a boundary: fall back to the nearest boundary component.
                    self.components
                        .iter()
                        .enumerate()
                        .map(|(c, comp)| {
                            let d = comp
                                .loops()
                                .map(|l| l.distance(x))
                                .fold(f64::INFINITY, f64::min);
                            (c, d)
                        })
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(c, _)| c)
                        .unwrap_or(0)
                });
        }
        labels
    }

    /// Points along every boundary edge spaced at most `step` apart, plus isolated points.
    pub fn boundary_samples(&self, step: f64) -> Vec<Point> {
        let mut out: Vec<Point> = self
            .isolated
            .iter()
            .map(|&i| self.index.point(i))
            .collect();
        for e in self.edges() {
            let k = ((e.length() / step).ceil() as usize).max(1);
            out.extend((0..k).map(|s| e.point_at(s as f64 / k as f64)));
        }
        out
    }

    /// Vertices of the convex hull polygon (only for the convex-hull kind).
    pub fn convex_polygon(&self) -> &[Point] {
        &self.convex
    }
}

/// Number of connected components and a component label per sample point.
pub fn connected_components(region: &HullRegion) -> (usize, Vec<usize>) {
    (region.component_count(), region.labels().to_vec())
}

/// Signed distance from `x` to the region boundary (positive inside).
pub fn distance_to_boundary(x: Point, region: &HullRegion) -> Result<f64> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(region.signed_distance(x))
}

/// Area of a hull region.
pub fn area(region: &HullRegion) -> f64 {
    region.area()
}
