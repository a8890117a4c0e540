mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rhull::density::Gaussian;
use rhull::geom::{build_index, r_convex_hull, HullRegion, Point, PointSet, Shape};
use rhull::sim::{sample, SyntheticDensity, SyntheticSupport};
use rhull::spacing::{
    beta_const, critical_value, maximal_spacing_oracle, test_r_convexity, u_statistic, CandidateSet,
    ShapeConstant, TestResult,
};
use rhull::{BandwidthRule, DensityField};

use common::uniform_square;

fn gumbel_quantile(alpha: f64) -> f64 {
    -(-(1.0 - alpha).ln()).ln()
}

#[test]
fn beta_constants() {
    assert_eq!(beta_const(1), 1.0);
    assert_eq!(beta_const(2), 1.0);
    // Gamma(5/2) = 3 sqrt(pi) / 4, so beta(3) = (1/6) (3 pi / 4)^2.
    assert!((beta_const(3) - 3.0 * PI * PI / 32.0).abs() < 1e-12);
    let s = ShapeConstant::new(2);
    assert_eq!(s.w_d, PI);
    assert!((s.a_norm - 1.0 / PI.sqrt()).abs() < 1e-15);
}

#[test]
fn critical_value_known_points() {
    let direct = |n: f64, a: f64| (gumbel_quantile(a) + n.ln() + n.ln().ln()) / n;
    let c = critical_value(100, 0.05, 2).unwrap();
    assert!((c - direct(100.0, 0.05)).abs() < 1e-15);
    // -log(-log 0.95) = 2.970195, so c = 9.102545 / 100.
    assert!((c - 0.0910255).abs() < 1e-6);
    let c = critical_value(1000, 0.01, 2).unwrap();
    assert!((c - 0.0134406).abs() < 1e-6);
}

#[test]
fn critical_value_decreases_in_alpha_and_n() {
    let mut prev = f64::INFINITY;
    for a in [0.001, 0.01, 0.05, 0.1, 0.5, 0.9] {
        let c = critical_value(500, a, 2).unwrap();
        assert!(c < prev);
        prev = c;
    }
    let mut prev = f64::INFINITY;
    for n in [100, 1_000, 10_000, 100_000] {
        let c = critical_value(n, 0.05, 2).unwrap();
        assert!(c < prev && c > 0.0);
        prev = c;
    }
    assert!(critical_value(100_000, 0.05, 2).unwrap() < 2e-4);
}

#[test]
fn u_statistic_special_values() {
    let n = 250usize;
    let nf = n as f64;
    assert!((u_statistic(0.0, n, 2).unwrap() + nf.ln() + nf.ln().ln()).abs() < 1e-12);
    let v = (nf.ln() + nf.ln().ln()) / nf;
    assert!(u_statistic(v, n, 2).unwrap().abs() < 1e-12);
    assert!(u_statistic(0.1, 2, 2).is_err());
}

proptest! {
    #[test]
    fn critical_value_inverts_u(n in 3usize..1_000_000, alpha in 1e-6f64..0.999_999, d in 1u32..6) {
        let c = critical_value(n, alpha, d).unwrap();
        let u = u_statistic(c, n, d).unwrap();
        prop_assert!((u - gumbel_quantile(alpha)).abs() < 1e-10);
    }
}

fn uniform_field(index: &std::sync::Arc<rhull::geom::TriangulationIndex>, f: f64) -> DensityField {
    DensityField::from_values(index, vec![f; index.len()]).unwrap()
}

/// Independent re-check of a rejection certificate.
fn check_witness(t: &TestResult, points: &PointSet, region: &HullRegion) {
    let w = t.statistic.witness.expect("rejection has a witness");
    let nearest = points.iter().map(|p| p.dist(w.center)).fold(f64::INFINITY, f64::min);
    assert!(nearest >= w.radius * (1.0 - 1e-9), "{nearest} < {}", w.radius);
    assert!(region.contains(w.center));
    assert!(region.boundary_distance(w.center) >= w.radius * (1.0 - 1e-9));
}

#[test]
fn annulus_rejected_at_large_r() {
    let sup = SyntheticSupport::annulus(0.35, 1.0);
    let pts = sample(&sup, &SyntheticDensity::Uniform, 2000, 11).unwrap();
    let index = build_index(pts.clone()).unwrap();
    let field = DensityField::estimate(&index, &BandwidthRule::default(), &Gaussian).unwrap();
    let t = test_r_convexity(&index, 5.0, 0.05, &field, 128).unwrap();
    assert!(t.reject);
    assert!((t.statistic.v_hat - t.c_crit).abs() <= 1e-12 * t.c_crit);
    let region = r_convex_hull(&index, 5.0).unwrap();
    check_witness(&t, &pts, &region);
    // The witness sits in the hole.
    assert!(t.statistic.witness.unwrap().center.norm() < 0.35);

    // The same ball certifies every larger radius.
    let w = t.statistic.witness.unwrap();
    for r in [8.0, 50.0] {
        let bigger = r_convex_hull(&index, r).unwrap();
        assert!(bigger.boundary_distance(w.center) >= w.radius && bigger.contains(w.center));
    }

    let t = test_r_convexity(&index, 0.2, 0.05, &field, 128).unwrap();
    assert!(!t.reject && t.statistic.witness.is_none());
    assert!(t.statistic.v_hat < t.c_crit);
}

#[test]
fn tiny_triangle_never_rejects() {
    let pts = PointSet::from_xy(&[(0.0, 0.0), (1e-3, 0.0), (0.0, 1e-3)]).unwrap();
    let index = build_index(pts).unwrap();
    let field = uniform_field(&index, 2e6);
    for r in [1e-4, 1e-3, 1.0, 1e6] {
        assert!(!test_r_convexity(&index, r, 0.05, &field, 128).unwrap().reject);
    }
}

#[test]
fn candidates_avoid_the_sample() {
    let pts = uniform_square(300, 3);
    let index = build_index(pts.clone()).unwrap();
    let field = DensityField::estimate(&index, &BandwidthRule::default(), &Gaussian).unwrap();
    let set = CandidateSet::build(&field, 0.05, 64).unwrap();
    assert!(!set.candidates.is_empty());
    for c in &set.candidates {
        let nearest = pts.iter().map(|p| p.dist(c.x)).fold(f64::INFINITY, f64::min);
        assert!(nearest >= c.radius * (1.0 - 1e-9));
        assert!(set.extremes.contains(&c.site));
    }
    // Interior samples contribute nothing: every site is on the boundary of C_m.
    let outer = r_convex_hull(&index, set.m).unwrap();
    for &i in &set.extremes {
        assert!(outer.boundary_distance(pts.points()[i]) < 1e-9);
    }
}

#[test]
fn decision_invariant_under_rigid_motion() {
    let pts = sample(&SyntheticSupport::annulus(0.35, 1.0), &SyntheticDensity::Uniform, 400, 5).unwrap();
    let f = 1.0 / (PI * (1.0 - 0.35 * 0.35));
    let decide = |p: &PointSet, r: f64| {
        let index = build_index(p.clone()).unwrap();
        test_r_convexity(&index, r, 0.05, &uniform_field(&index, f), 256).unwrap().reject
    };
    let (s, c) = 0.7f64.sin_cos();
    let moved = PointSet::new(
        pts.iter()
            .map(|p| Point::new(c * p.x - s * p.y + 3.0, s * p.x + c * p.y - 1.0))
            .collect(),
    )
    .unwrap();
    for r in [0.1, 0.3, 2.0] {
        assert_eq!(decide(&pts, r), decide(&moved, r), "r = {r}");
    }
}

#[test]
fn oracle_on_empty_disc() {
    let disc = SyntheticSupport::unit_disc();
    let f = |_: Point| 1.0 / PI;
    let o = maximal_spacing_oracle(&[], &disc, &f, 256).unwrap();
    assert!((o.v - 1.0).abs() < 1e-12);
    assert!(o.center.norm() < 1e-12);
}

#[test]
fn oracle_grid_refinement() {
    let pts = uniform_square(200, 8);
    let sq = SyntheticSupport::unit_square();
    let f = |_: Point| 1.0;
    let coarse = maximal_spacing_oracle(pts.points(), &sq, &f, 256).unwrap();
    let fine = maximal_spacing_oracle(pts.points(), &sq, &f, 1024).unwrap();
    assert!(fine.delta >= coarse.delta - 1e-12);
    assert!(fine.delta - coarse.delta <= coarse.error_bound);
    // Uniform density factors out: delta = sqrt(pi) times the largest empty radius.
    let radius = fine.delta / PI.sqrt();
    let nn = pts.iter().map(|p| p.dist(fine.center)).fold(f64::INFINITY, f64::min);
    assert!((radius - nn.min(Shape::boundary_distance(&sq, fine.center))).abs() < 1e-12);
}

/// Small samples: the candidate search agrees with a brute-force grid search for the
/// largest scaled empty ball inside `C_r`, evaluated with the same plug-in density.
#[test]
fn agrees_with_grid_oracle_on_small_samples() {
    let mut cases = 0;
    let mut agree = 0;
    for sup in [SyntheticSupport::annulus(0.35, 1.0), SyntheticSupport::unit_disc(), SyntheticSupport::unit_square()] {
        let dens = SyntheticDensity::Uniform;
        for seed in 0..8 {
            for n in [20usize, 50] {
                let index = build_index(sample(&sup, &dens, n, seed).unwrap()).unwrap();
                let values = index.points().iter().map(|&p| dens.eval(&sup, p)).collect();
                let field = DensityField::from_values(&index, values).unwrap();
                let set = CandidateSet::build(&field, 0.05, 256).unwrap();
                for r in [0.1, 0.3, 1.0, 5.0] {
                    let region = r_convex_hull(&index, r).unwrap();
                    let t = set.evaluate(&region);
                    let plug_in = |x: Point| field.cell_max(x);
                    // A region with no interior grid point holds no ball at all.
                    let v = maximal_spacing_oracle(index.points().points(), &region, &plug_in, 512)
                        .map_or(0.0, |o| o.v);
                    cases += 1;
                    if (v >= set.c_crit) == t.reject {
                        agree += 1;
                    }
                }
            }
        }
    }
    assert_eq!(agree, cases);
}
