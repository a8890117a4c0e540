mod common;

use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rhull::density::Gaussian;
use rhull::geom::{build_index, convex_hull, Point, PointSet, TriangulationIndex};
use rhull::select::{validate_endpoints, Endpoints};
use rhull::sim::{sample, SyntheticDensity, SyntheticSupport};
use rhull::spacing::test_r_convexity;
use rhull::{select_r0, BandwidthRule, DensityField, Error, Fallback, SelectionConfig, SelectionResult};

use common::{uniform_disc, uniform_square};

fn annulus(n: usize, seed: u64, shift: Point) -> Vec<Point> {
    let pts = sample(&SyntheticSupport::annulus(0.35, 1.0), &SyntheticDensity::Uniform, n, seed).unwrap();
    pts.iter().map(|&p| p + shift).collect()
}

fn index_of(pts: Vec<Point>) -> Arc<TriangulationIndex> {
    build_index(PointSet::new(pts).unwrap()).unwrap()
}

/// Re-runs the test at both ends of every bracket in the trace.
fn check_bracket(index: &Arc<TriangulationIndex>, cfg: &SelectionConfig, res: &SelectionResult) {
    let field = DensityField::estimate(index, &cfg.bandwidth, &Gaussian).unwrap();
    let test = |r: f64| test_r_convexity(index, r, cfg.alpha, &field, cfg.angular_samples).unwrap().reject;
    let (r_min, r_max) = res.bracket.expect("bisection ran");
    assert!(!test(r_min));
    assert!(test(r_max));
    assert_eq!(res.trace.len(), cfg.max_iterations as usize);
    let (mut lo, mut hi) = (r_min, r_max);
    for step in &res.trace {
        assert!(step.r > lo && step.r < hi);
        if step.reject {
            assert_eq!((step.r_lo, step.r_hi), (lo, step.r));
        } else {
            assert_eq!((step.r_lo, step.r_hi), (step.r, hi));
        }
        lo = step.r_lo;
        hi = step.r_hi;
        assert!(!test(lo), "accepted end {lo}");
        assert!(test(hi), "rejected end {hi}");
    }
    assert_eq!(res.final_bracket, Some((lo, hi)));
    assert_eq!(res.r_hat, lo);
    let width = (r_max - r_min) / 2f64.powi(cfg.max_iterations as i32);
    assert_eq!(res.bracket_width, Some(width));
    assert!((hi - lo - width).abs() <= 4.0 * f64::EPSILON * r_max);
}

#[test]
fn annulus_bisection() {
    let index = index_of(annulus(500, 1, Point::default()));
    let cfg = SelectionConfig {
        alpha: 0.01,
        max_iterations: 12,
        ..Default::default()
    };
    let res = select_r0(&index, &cfg).unwrap();
    assert_eq!(res.fallback, Fallback::None);
    assert!(res.r_hat > 0.2 && res.r_hat < 0.55, "{}", res.r_hat);
    assert_eq!(res.components, 1);
    check_bracket(&index, &cfg, &res);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bracket_invariant(seed in 0u64..10_000, n in 60usize..250, iters in 1u32..14, alpha in 0.01f64..0.2) {
        let index = index_of(annulus(n, seed, Point::default()));
        let cfg = SelectionConfig {
            alpha,
            max_iterations: iters,
            r_max: Some(5.0),
            ..Default::default()
        };
        let res = select_r0(&index, &cfg).unwrap();
        if res.fallback == Fallback::None {
            check_bracket(&index, &cfg, &res);
        } else {
            prop_assert!(res.trace.is_empty() && res.bracket.is_none());
        }
    }
}

#[test]
fn deterministic() {
    let index = index_of(annulus(400, 9, Point::new(2.0, -1.0)));
    let cfg = SelectionConfig::default();
    let a = select_r0(&index, &cfg).unwrap().to_json();
    let b = select_r0(&index, &cfg).unwrap().to_json();
    assert_eq!(a, b);
    // A fresh index over the same points gives the same answer.
    let again = index_of(index.points().points().to_vec());
    assert_eq!(select_r0(&again, &cfg).unwrap().to_json(), a);
}

fn check_sandwich(index: &Arc<TriangulationIndex>, res: &SelectionResult) {
    let region = &res.support.region;
    for &p in index.points().iter() {
        assert!(region.contains(p) || region.distance(p) < 1e-12);
    }
    let hull = convex_hull(index);
    assert!(region.area() <= hull.area() * (1.0 + 1e-12));
    for p in region.boundary_samples(1e-2) {
        assert!(hull.signed_distance(p) > -1e-9, "{p:?}");
    }
}

#[test]
fn fallbacks_are_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // Three small clusters on a triangle, one component allowed: they only merge once the
    // hull spans the empty triangle between them, which the test rejects.
    let mut clusters = Vec::new();
    for k in 0..3 {
        let t = k as f64 * std::f64::consts::TAU / 3.0;
        clusters.extend(uniform_disc(100, Point::from_angle(t) * 6.0, 0.5, &mut rng));
    }
    let cases = [
        (index_of(annulus(400, 2, Point::default())), SelectionConfig::default()),
        (
            index_of(uniform_disc(500, Point::default(), 1.0, &mut rng)),
            SelectionConfig::default(),
        ),
        (
            index_of(clusters),
            SelectionConfig {
                max_components: 1,
                bandwidth: BandwidthRule {
                    h0: 1.0,
                    explicit: Some(0.3),
                },
                ..Default::default()
            },
        ),
        (build_index(uniform_square(300, 3)).unwrap(), SelectionConfig::default()),
    ];
    let mut seen = Vec::new();
    for (index, cfg) in &cases {
        let res = select_r0(index, cfg).unwrap();
        check_sandwich(index, &res);
        match res.fallback {
            Fallback::None => {
                assert!(res.bracket.is_some() && res.r_hat.is_finite());
                assert_eq!(res.trace.len(), cfg.max_iterations as usize);
            }
            Fallback::ComponentCap => {
                assert!(res.bracket.is_none() && res.trace.is_empty());
                assert!(res.components <= cfg.max_components);
                assert!(res.endpoint_checks.last().unwrap().reject);
            }
            Fallback::ConvexHull => {
                assert!(res.bracket.is_none() && res.trace.is_empty());
                assert!(res.r_hat.is_infinite() && res.support.region.is_convex_hull());
            }
        }
        seen.push(res.fallback);
    }
    assert_eq!(seen[0], Fallback::None);
    assert_eq!(seen[1], Fallback::ConvexHull);
    assert_eq!(seen[2], Fallback::ComponentCap);
    assert_eq!(seen[3], Fallback::ConvexHull);
}

#[test]
fn three_points_give_the_triangle() {
    let index = index_of(vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(0.5, 1.0)]);
    let res = select_r0(&index, &SelectionConfig::default()).unwrap();
    assert_eq!(res.fallback, Fallback::ConvexHull);
    assert_eq!(res.components, 1);
    assert!((res.area - 1.0).abs() < 1e-12);
}

#[test]
fn two_annuli_give_two_components() {
    let mut pts = annulus(800, 5, Point::new(-3.0, 0.0));
    pts.extend(annulus(800, 6, Point::new(3.0, 0.0)));
    let index = index_of(pts);
    let res = select_r0(&index, &SelectionConfig::default()).unwrap();
    assert_eq!(res.fallback, Fallback::None);
    assert!(res.r_hat < 1.0, "{}", res.r_hat);
    assert_eq!(res.components, 2);
    // Each component keeps its hole.
    for c in res.support.region.components() {
        assert_eq!(c.holes.len(), 1);
    }
}

#[test]
fn shrink_factor_builds_smaller_region() {
    let index = index_of(annulus(500, 12, Point::default()));
    let full = select_r0(&index, &SelectionConfig::default()).unwrap();
    let cfg = SelectionConfig {
        nu: 0.5,
        ..Default::default()
    };
    let half = select_r0(&index, &cfg).unwrap();
    assert_eq!(half.r_hat, full.r_hat);
    assert_eq!(half.r_used, 0.5 * full.r_hat);
    assert!(half.area <= full.area);
}

#[test]
fn endpoint_validation() {
    let index = index_of(annulus(2000, 21, Point::default()));
    let cfg = SelectionConfig {
        alpha: 0.05,
        r_max: Some(5.0),
        ..Default::default()
    };
    match validate_endpoints(&index, &cfg).unwrap() {
        Endpoints::Bracket { r_max, .. } => assert_eq!(r_max, 5.0),
        other => panic!("{other:?}"),
    }
    let bad = SelectionConfig {
        r_min: Some(2.0),
        r_max: Some(2.0),
        ..Default::default()
    };
    assert!(matches!(select_r0(&index, &bad), Err(Error::InvalidEndpoints { .. })));
    let bad = SelectionConfig {
        alpha: 1.0,
        ..Default::default()
    };
    assert_eq!(select_r0(&index, &bad).unwrap_err(), Error::AlphaOutOfRange(1.0));
}
