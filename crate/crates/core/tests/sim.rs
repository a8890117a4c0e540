use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhull::density::Gaussian;
use rhull::geom::{build_index, Point, Shape};
use rhull::seed::derive_seed;
use rhull::sim::{
    consistency_study, level_power_study, rate_study, sample, ConsistencyConfig, DiscSpec, ExperimentReport,
    LevelPowerConfig, RateConfig, SlopeFit, SyntheticDensity, SyntheticSupport,
};
use rhull::spacing::test_r_convexity;
use rhull::{BandwidthRule, DensityField, Error, SelectionConfig};

fn supports() -> Vec<SyntheticSupport> {
    vec![
        SyntheticSupport::unit_disc(),
        SyntheticSupport::Disc {
            center: Point::new(2.0, -1.0),
            radius: 0.5,
        },
        SyntheticSupport::annulus(0.35, 1.0),
        SyntheticSupport::Discs {
            discs: vec![
                DiscSpec {
                    center: Point::new(-2.0, 0.0),
                    radius: 1.0,
                },
                DiscSpec {
                    center: Point::new(2.0, 1.0),
                    radius: 0.5,
                },
            ],
        },
        SyntheticSupport::Rectangle {
            min: Point::new(-1.0, 0.0),
            max: Point::new(2.0, 0.5),
        },
    ]
}

fn densities() -> Vec<SyntheticDensity> {
    vec![
        SyntheticDensity::Uniform,
        SyntheticDensity::Ramp { slope: 0.8, angle: 0.3 },
        SyntheticDensity::Ramp { slope: 0.5, angle: 2.0 },
    ]
}

/// Composite Simpson weights on `[a, b]` with `2m` intervals.
fn simpson(a: f64, b: f64, m: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / (2 * m) as f64;
    (0..=2 * m)
        .map(|k| {
            let w = if k == 0 || k == 2 * m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            (a + k as f64 * h, w * h / 3.0)
        })
        .collect()
}

/// Integral over a ring around `c` in polar coordinates: Simpson in the radius, the
/// periodic trapezoid rule in the angle.
fn ring_integral(f: &dyn Fn(Point) -> f64, c: Point, r0: f64, r1: f64) -> f64 {
    let k = 256;
    let mut total = 0.0;
    for (rho, w) in simpson(r0, r1, 64) {
        let s: f64 = (0..k)
            .map(|j| {
                // Midpoint angles keep the samples off the axes.
                let t = (j as f64 + 0.5) * TAU / k as f64;
                f(c + Point::from_angle(t) * rho)
            })
            .sum();
        total += w * rho * s * TAU / k as f64;
    }
    total
}

fn integral(support: &SyntheticSupport, f: &dyn Fn(Point) -> f64) -> f64 {
    // Stay strictly inside the support so membership rounding plays no part.
    let e = 1e-12;
    match support {
        SyntheticSupport::Disc { center, radius } => ring_integral(f, *center, 0.0, radius * (1.0 - e)),
        SyntheticSupport::Annulus { center, r_in, r_out } => {
            ring_integral(f, *center, r_in * (1.0 + e), r_out * (1.0 - e))
        }
        SyntheticSupport::Discs { discs } => discs
            .iter()
            .map(|d| ring_integral(f, d.center, 0.0, d.radius * (1.0 - e)))
            .sum(),
        SyntheticSupport::Rectangle { min, max } => {
            let (dx, dy) = ((max.x - min.x) * e, (max.y - min.y) * e);
            let mut total = 0.0;
            for (x, wx) in simpson(min.x + dx, max.x - dx, 16) {
                for (y, wy) in simpson(min.y + dy, max.y - dy, 16) {
                    total += wx * wy * f(Point::new(x, y));
                }
            }
            total
        }
    }
}

#[test]
fn areas_match_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for s in supports() {
        let bb = s.bbox();
        let m = 200_000;
        let hits = (0..m)
            .filter(|_| {
                let p = Point::new(
                    bb.min.x + rng.random::<f64>() * bb.width(),
                    bb.min.y + rng.random::<f64>() * bb.height(),
                );
                s.contains(p)
            })
            .count();
        let p = hits as f64 / m as f64;
        let est = p * bb.area();
        let se = bb.area() * (p * (1.0 - p) / m as f64).sqrt();
        assert!((est - s.area()).abs() <= 3.0 * se, "{s:?}: {est} vs {}", s.area());
    }
}

#[test]
fn densities_integrate_to_one() {
    for s in supports() {
        assert!((integral(&s, &|_| 1.0) - s.area()).abs() < 1e-6 * s.area().max(1.0));
        for d in densities() {
            let total = integral(&s, &|x| d.eval(&s, x));
            assert!((total - 1.0).abs() < 1e-6, "{s:?} {d:?}: {total}");
        }
    }
}

#[test]
fn density_bounds_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for s in supports() {
        for d in densities() {
            let b = d.bounds(&s);
            assert!(b.f0 > 0.0 && b.f0 <= b.f1);
            let pts = sample(&s, &SyntheticDensity::Uniform, 2000, rng.random()).unwrap();
            let pts = pts.points();
            for (k, &x) in pts.iter().enumerate() {
                let fx = d.eval(&s, x);
                assert!(fx >= b.f0 * (1.0 - 1e-12) && fx <= b.f1 * (1.0 + 1e-12));
                let y = pts[(k * 7 + 3) % pts.len()];
                let lip = (fx - d.eval(&s, y)).abs();
                assert!(lip <= b.k_f * x.dist(y) * (1.0 + 1e-9) + 1e-15, "{s:?} {d:?}");
            }
            assert_eq!(d.eval(&s, Point::new(50.0, 50.0)), 0.0);
        }
    }
}

#[test]
fn samples_lie_in_the_support() {
    for s in supports() {
        for d in densities() {
            let pts = sample(&s, &d, 3000, 7).unwrap();
            assert_eq!(pts.len(), 3000);
            assert!(pts.iter().all(|&p| s.contains(p)));
        }
    }
    let ring = sample(&SyntheticSupport::annulus(0.35, 1.0), &SyntheticDensity::Uniform, 5000, 3).unwrap();
    assert_eq!(ring.iter().filter(|p| p.norm() < 0.35).count(), 0);
}

#[test]
fn square_mean_within_three_standard_errors() {
    let n = 10_000;
    let pts = sample(&SyntheticSupport::unit_square(), &SyntheticDensity::Uniform, n, 99).unwrap();
    let se = (1.0f64 / 12.0 / n as f64).sqrt();
    let mean = pts.iter().fold(Point::default(), |a, &p| a + p) * (1.0 / n as f64);
    assert!((mean.x - 0.5).abs() < 3.0 * se && (mean.y - 0.5).abs() < 3.0 * se);
}

#[test]
fn ramp_tilts_the_sample() {
    let d = SyntheticDensity::Ramp { slope: 0.9, angle: 0.0 };
    let pts = sample(&SyntheticSupport::unit_disc(), &d, 20_000, 5).unwrap();
    // E[x] = slope * E[x^2] / L = 0.9 / 4 for the unit disc.
    let mean = pts.iter().map(|p| p.x).sum::<f64>() / pts.len() as f64;
    assert!((mean - 0.225).abs() < 0.015, "{mean}");
}

#[test]
fn sampling_errors() {
    let bad = SyntheticSupport::annulus(1.0, 0.5);
    assert!(sample(&bad, &SyntheticDensity::Uniform, 10, 0).is_err());
    let flat = SyntheticSupport::Rectangle {
        min: Point::new(0.0, 0.0),
        max: Point::new(1.0, 0.0),
    };
    assert_eq!(sample(&flat, &SyntheticDensity::Uniform, 10, 0).unwrap_err(), Error::DegenerateSupport);
    let steep = SyntheticDensity::Ramp { slope: 1.5, angle: 0.0 };
    assert!(sample(&SyntheticSupport::unit_disc(), &steep, 10, 0).is_err());
}

#[test]
fn slope_fit_recovers_a_line() {
    let xs = [0.0, 1.0, 2.0, 3.0];
    let ys: Vec<f64> = xs.iter().map(|x| 0.75 * x - 2.0).collect();
    let fit = SlopeFit::fit("d_h", &xs, &ys).unwrap();
    assert!((fit.slope - 0.75).abs() < 1e-12 && (fit.intercept + 2.0).abs() < 1e-12);
    assert!(fit.std_error < 1e-12);
    assert!(SlopeFit::fit("d_h", &[1.0], &[2.0]).is_none());
}

fn level_config() -> LevelPowerConfig {
    LevelPowerConfig {
        support: SyntheticSupport::annulus(0.35, 1.0),
        density: SyntheticDensity::Uniform,
        r_grid: vec![0.2, 5.0],
        alpha: 0.05,
        n: 300,
        replicates: 50,
        seed: 17,
        angular_samples: 64,
        bandwidth: BandwidthRule::default(),
        true_density: false,
    }
}

#[test]
fn level_power_small_run() {
    let cfg = level_config();
    let report = level_power_study(&cfg).unwrap();
    assert_eq!(report.rows.len(), 100);
    assert_eq!(report.summary.len(), 2);
    let rate = |r: f64| report.summary.iter().find(|s| s.r == Some(r)).unwrap().rejection_rate.unwrap();
    assert!(rate(5.0) > rate(0.2));
    assert!(rate(5.0) >= 0.8, "{}", rate(5.0));
    let s = &report.summary[0];
    let p = s.rejection_rate.unwrap();
    assert!((s.rejection_se.unwrap() - (p * (1.0 - p) / 50.0).sqrt()).abs() < 1e-15);
    assert_eq!(
        report.rows.iter().filter(|r| r.r == Some(0.2) && r.reject == Some(true)).count() as f64 / 50.0,
        p
    );
}

#[test]
fn rows_reproduce_from_the_seed_ledger() {
    let cfg = level_config();
    let report = level_power_study(&cfg).unwrap();
    for row in report.rows.iter().filter(|r| r.replicate % 17 == 0) {
        assert_eq!(row.seed, derive_seed(derive_seed(cfg.seed, cfg.n as u64), row.replicate as u64));
        let index = build_index(sample(&cfg.support, &cfg.density, cfg.n, row.seed).unwrap()).unwrap();
        let field = DensityField::estimate(&index, &cfg.bandwidth, &Gaussian).unwrap();
        let t = test_r_convexity(&index, row.r.unwrap(), cfg.alpha, &field, cfg.angular_samples).unwrap();
        assert_eq!(Some(t.reject), row.reject);
        assert_eq!(Some(t.statistic.v_hat), row.v_hat);
    }
}

fn run_with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let cfg = ConsistencyConfig {
        support: SyntheticSupport::annulus(0.35, 1.0),
        density: SyntheticDensity::Uniform,
        n_grid: vec![150, 300],
        replicates: 6,
        seed: 3,
        selection: SelectionConfig {
            max_iterations: 8,
            ..Default::default()
        },
        band: Some((0.2, 0.55)),
    };
    let one: ExperimentReport = run_with_threads(1, || consistency_study(&cfg).unwrap());
    let three = run_with_threads(3, || consistency_study(&cfg).unwrap());
    assert_eq!(one.to_json(), three.to_json());
    assert_eq!(one.rows_csv(), three.rows_csv());
    assert_eq!(one.summary.len(), 2);
    for s in &one.summary {
        let (q1, q3) = (s.r_hat_q1.unwrap(), s.r_hat_q3.unwrap());
        assert!(q1 <= s.r_hat_median.unwrap() && s.r_hat_median.unwrap() <= q3);
        assert!((s.r_hat_iqr.unwrap() - (q3 - q1)).abs() < 1e-15);
        let band = s.r_hat_in_band.unwrap();
        assert!((0.0..=1.0).contains(&band));
    }
    // The JSON report parses back and keeps the seed rule.
    let v: serde_json::Value = serde_json::from_str(&one.to_json()).unwrap();
    assert_eq!(v["kind"], "consistency");
    assert!(v["seed_rule"].as_str().unwrap().contains("derive_seed"));
}

#[test]
fn rate_small_run() {
    let cfg = RateConfig {
        support: SyntheticSupport::annulus(0.35, 1.0),
        density: SyntheticDensity::Uniform,
        n_grid: vec![200, 800],
        nu: 1.0,
        replicates: 4,
        seed: 8,
        selection: SelectionConfig {
            max_iterations: 10,
            ..Default::default()
        },
        measure_samples: 20_000,
        tolerance: None,
    };
    let report = rate_study(&cfg).unwrap();
    assert_eq!(report.rows.len(), 8);
    for row in &report.rows {
        let (h, b, m) = (row.d_h.unwrap(), row.d_h_boundary.unwrap(), row.d_mu.unwrap());
        // Both are computed to within the default tolerance, about 4.3 / 2048.
        assert!(h >= 0.0 && h <= b + 2.5e-3, "{h} {b}");
        assert!(m >= 0.0 && m < 1.0);
    }
    let small = &report.summary[0];
    let large = &report.summary[1];
    assert!(large.d_h_median.unwrap() < small.d_h_median.unwrap());
    let fit = report.fit("d_h").unwrap();
    assert_eq!(fit.points, 2);
    assert!(fit.slope > 0.0);
    assert!(report.fit("d_h_boundary").is_some() && report.fit("d_mu").is_some());
    let csv = report.rows_csv();
    assert_eq!(csv.lines().count(), 9);

    let bad = RateConfig {
        n_grid: vec![200],
        ..cfg
    };
    assert!(rate_study(&bad).is_err());
}

#[test]
fn study_errors() {
    let few = LevelPowerConfig {
        replicates: 49,
        ..level_config()
    };
    assert!(level_power_study(&few).is_err());
    let bad_r = LevelPowerConfig {
        r_grid: vec![0.5, -1.0],
        ..level_config()
    };
    assert!(level_power_study(&bad_r).is_err());
    let bad_alpha = LevelPowerConfig {
        alpha: 0.0,
        ..level_config()
    };
    assert_eq!(level_power_study(&bad_alpha).unwrap_err(), Error::AlphaOutOfRange(0.0));
    let empty = ConsistencyConfig {
        support: SyntheticSupport::unit_disc(),
        density: SyntheticDensity::Uniform,
        n_grid: vec![],
        replicates: 2,
        seed: 0,
        selection: SelectionConfig::default(),
        band: None,
    };
    assert!(consistency_study(&empty).is_err());
    assert!(SyntheticSupport::Discs { discs: vec![] }.validate().is_err());
    let overlapping = SyntheticSupport::Discs {
        discs: vec![
            DiscSpec {
                center: Point::new(0.0, 0.0),
                radius: 1.0,
            },
            DiscSpec {
                center: Point::new(1.0, 0.0),
                radius: 1.0,
            },
        ],
    };
    assert!(overlapping.validate().is_err());
}

#[test]
fn known_r0() {
    assert_eq!(SyntheticSupport::annulus(0.35, 1.0).r0(), Some(0.35));
    assert_eq!(SyntheticSupport::unit_disc().r0(), Some(f64::INFINITY));
    assert_eq!(supports()[3].r0(), None);
}
