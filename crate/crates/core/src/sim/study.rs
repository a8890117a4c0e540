use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{quantile, sorted, ExperimentReport, ReplicateRow, SlopeFit, SummaryRow};
use super::support::{SyntheticDensity, SyntheticSupport};
use super::sample;
use crate::density::{BandwidthRule, DensityField, Gaussian};
use crate::error::{Error, Result};
use crate::geom::{
    boundary_hausdorff, build_index, convex_hull, distance_in_measure, hausdorff, r_convex_hull,
    TriangulationIndex,
};
use crate::seed::derive_seed;
use crate::select::{select_with_field, Fallback, SelectionConfig};
use crate::spacing::CandidateSet;

const SEED_RULE: &str = "replicate seed = derive_seed(derive_seed(seed, n), replicate)";

fn replicate_seed(seed: u64, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(seed, n as u64), rep as u64)
}

fn default_angular() -> usize {
    128
}

fn default_measure_samples() -> usize {
    200_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPowerConfig {
    pub support: SyntheticSupport,
    #[serde(default = "uniform")]
    pub density: SyntheticDensity,
    pub r_grid: Vec<f64>,
    pub alpha: f64,
    pub n: usize,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_angular")]
    pub angular_samples: usize,
    #[serde(default)]
    pub bandwidth: BandwidthRule,
    /// Plug in the true density at the sample points instead of the kernel estimate.
    #[serde(default)]
    pub true_density: bool,
}

fn uniform() -> SyntheticDensity {
    SyntheticDensity::Uniform
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    pub support: SyntheticSupport,
    #[serde(default = "uniform")]
    pub density: SyntheticDensity,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub selection: SelectionConfig,
    /// Band for the reported coverage fraction of `r_hat`.
    #[serde(default)]
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    pub support: SyntheticSupport,
    #[serde(default = "uniform")]
    pub density: SyntheticDensity,
    pub n_grid: Vec<usize>,
    #[serde(default = "one")]
    pub nu: f64,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub selection: SelectionConfig,
    /// Monte Carlo budget for the distance in measure.
    #[serde(default = "default_measure_samples")]
    pub measure_samples: usize,
    /// Hausdorff tolerance; defaults to the joint bounding-box diagonal over 2048.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn check_common(support: &SyntheticSupport, density: &SyntheticDensity, replicates: usize) -> Result<()> {
    support.validate()?;
    density.validate()?;
    if replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be positive".into()));
    }
    Ok(())
}

fn field_for(
    index: &Arc<TriangulationIndex>,
    support: &SyntheticSupport,
    density: &SyntheticDensity,
    truth: bool,
    rule: &BandwidthRule,
) -> Result<DensityField> {
    if truth {
        let values = index.points().iter().map(|&p| density.eval(support, p)).collect();
        DensityField::from_values(index, values)
    } else {
        DensityField::estimate(index, rule, &Gaussian)
    }
}

/// Rejection frequency of the r-convexity test at each radius of the grid.
pub fn level_power_study(config: &LevelPowerConfig) -> Result<ExperimentReport> {
    check_common(&config.support, &config.density, config.replicates)?;
    if config.replicates < 50 {
        return Err(Error::InvalidConfig("level and power need at least 50 replicates".into()));
    }
    if config.r_grid.is_empty() || config.r_grid.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidRadius(config.r_grid.first().copied().unwrap_or(f64::NAN)));
    }
    let n = config.n;
    let per_rep: Vec<Vec<ReplicateRow>> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| {
            let seed = replicate_seed(config.seed, n, rep);
            let pts = sample(&config.support, &config.density, n, seed)?;
            let index = build_index(pts)?;
            let field = field_for(&index, &config.support, &config.density, config.true_density, &config.bandwidth)?;
            let candidates = CandidateSet::build(&field, config.alpha, config.angular_samples)?;
            config
                .r_grid
                .iter()
                .map(|&r| {
                    let region = if r.is_finite() { r_convex_hull(&index, r)? } else { convex_hull(&index) };
                    let t = candidates.evaluate(&region);
                    Ok(ReplicateRow {
                        n,
                        replicate: rep,
                        seed,
                        r: Some(r),
                        reject: Some(t.reject),
                        v_hat: Some(t.statistic.v_hat),
                        components: Some(t.components_at_r),
                        ..Default::default()
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<ReplicateRow> = per_rep.into_iter().flatten().collect();
    let reps = config.replicates as f64;
    let summary = config
        .r_grid
        .iter()
        .map(|&r| {
            let k = rows.iter().filter(|x| x.r == Some(r) && x.reject == Some(true)).count();
            let p = k as f64 / reps;
            SummaryRow {
                n,
                replicates: config.replicates,
                r: Some(r),
                rejection_rate: Some(p),
                rejection_se: Some((p * (1.0 - p) / reps).sqrt()),
                ..Default::default()
            }
        })
        .collect();
    Ok(ExperimentReport {
        kind: "level-power".into(),
        config: serde_json::to_value(config).expect("config serializes"),
        replicates: config.replicates,
        seed: config.seed,
        seed_rule: SEED_RULE.into(),
        rows,
        summary,
        fits: Vec::new(),
    })
}

fn selection_rows<F>(
    support: &SyntheticSupport,
    density: &SyntheticDensity,
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
    selection: &SelectionConfig,
    extra: F,
) -> Result<Vec<ReplicateRow>>
where
    F: Fn(&mut ReplicateRow, &crate::select::SelectionResult, u64) -> Result<()> + Sync,
{
    selection.validate()?;
    let jobs: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| (0..replicates).map(move |rep| (n, rep)))
        .collect();
    jobs.into_par_iter()
        .map(|(n, rep)| {
            let seed = replicate_seed(seed, n, rep);
            let pts = sample(support, density, n, seed)?;
            let index = build_index(pts)?;
            let field = DensityField::estimate(&index, &selection.bandwidth, &Gaussian)?;
            let res = select_with_field(&index, &field, selection)?;
            let mut row = ReplicateRow {
                n,
                replicate: rep,
                seed,
                r_hat: Some(res.r_hat),
                fallback: Some(res.fallback),
                components: Some(res.components),
                ..Default::default()
            };
            extra(&mut row, &res, seed)?;
            Ok(row)
        })
        .collect()
}

/// Distribution of the selected radius across replicates, for each sample size.
pub fn consistency_study(config: &ConsistencyConfig) -> Result<ExperimentReport> {
    check_common(&config.support, &config.density, config.replicates)?;
    if config.n_grid.is_empty() {
        return Err(Error::InvalidConfig("n_grid is empty".into()));
    }
    let rows = selection_rows(
        &config.support,
        &config.density,
        &config.n_grid,
        config.replicates,
        config.seed,
        &config.selection,
        |_, _, _| Ok(()),
    )?;
    let summary = config
        .n_grid
        .iter()
        .map(|&n| {
            let here: Vec<&ReplicateRow> = rows.iter().filter(|r| r.n == n).collect();
            let r_hat = sorted(here.iter().filter_map(|r| r.r_hat));
            let (q1, q3) = (quantile(&r_hat, 0.25), quantile(&r_hat, 0.75));
            SummaryRow {
                n,
                replicates: here.len(),
                r_hat_median: Some(quantile(&r_hat, 0.5)),
                r_hat_q1: Some(q1),
                r_hat_q3: Some(q3),
                r_hat_iqr: Some(q3 - q1),
                r_hat_in_band: config.band.map(|(lo, hi)| {
                    r_hat.iter().filter(|&&r| r >= lo && r <= hi).count() as f64 / r_hat.len() as f64
                }),
                fallbacks: Some(here.iter().filter(|r| r.fallback != Some(Fallback::None)).count()),
                ..Default::default()
            }
        })
        .collect();
    Ok(ExperimentReport {
        kind: "consistency".into(),
        config: serde_json::to_value(config).expect("config serializes"),
        replicates: config.replicates,
        seed: config.seed,
        seed_rule: SEED_RULE.into(),
        rows,
        summary,
        fits: Vec::new(),
    })
}

/// Distances between the support and `C_{nu r_hat}(X_n)` across sample sizes, with
/// least-squares slopes of the log medians on `log(log n / n)`.
pub fn rate_study(config: &RateConfig) -> Result<ExperimentReport> {
    check_common(&config.support, &config.density, config.replicates)?;
    if config.n_grid.len() < 2 || config.n_grid.iter().any(|&n| n < 3) {
        return Err(Error::InvalidConfig("n_grid needs at least two sizes of 3 or more".into()));
    }
    let selection = SelectionConfig {
        nu: config.nu,
        ..config.selection.clone()
    };
    let support = &config.support;
    let rows = selection_rows(
        support,
        &config.density,
        &config.n_grid,
        config.replicates,
        config.seed,
        &selection,
        |row, res, seed| {
            let region = &res.support.region;
            let h = hausdorff(support, region, config.tolerance)?;
            let b = boundary_hausdorff(support, region, config.tolerance)?;
            let m = distance_in_measure(support, region, config.measure_samples, derive_seed(seed, u64::MAX))?;
            row.d_h = Some(h.value);
            row.d_h_boundary = Some(b.value);
            row.d_mu = Some(m.value);
            Ok(())
        },
    )?;
    let mut summary = Vec::new();
    for &n in &config.n_grid {
        let here: Vec<&ReplicateRow> = rows.iter().filter(|r| r.n == n).collect();
        let med = |f: fn(&ReplicateRow) -> Option<f64>| sorted(here.iter().filter_map(|r| f(r)));
        let dh = med(|r| r.d_h);
        let iqr = quantile(&dh, 0.75) - quantile(&dh, 0.25);
        summary.push(SummaryRow {
            n,
            replicates: here.len(),
            r_hat_median: Some(quantile(&med(|r| r.r_hat), 0.5)),
            fallbacks: Some(here.iter().filter(|r| r.fallback != Some(Fallback::None)).count()),
            d_h_median: Some(quantile(&dh, 0.5)),
            d_h_median_se: Some(1.2533 * (iqr / 1.349) / (dh.len() as f64).sqrt()),
            d_h_boundary_median: Some(quantile(&med(|r| r.d_h_boundary), 0.5)),
            d_mu_median: Some(quantile(&med(|r| r.d_mu), 0.5)),
            ..Default::default()
        });
    }
    let xs: Vec<f64> = config
        .n_grid
        .iter()
        .map(|&n| ((n as f64).ln() / n as f64).ln())
        .collect();
    let fit = |name: &str, f: fn(&SummaryRow) -> Option<f64>| {
        let ys: Vec<f64> = summary.iter().map(|s| f(s).unwrap_or(f64::NAN).ln()).collect();
        SlopeFit::fit(name, &xs, &ys)
    };
    let fits = [
        fit("d_h", |s| s.d_h_median),
        fit("d_h_boundary", |s| s.d_h_boundary_median),
        fit("d_mu", |s| s.d_mu_median),
    ]
    .into_iter()
    .flatten()
    .collect();
    Ok(ExperimentReport {
        kind: "rate".into(),
        config: serde_json::to_value(config).expect("config serializes"),
        replicates: config.replicates,
        seed: config.seed,
        seed_rule: SEED_RULE.into(),
        rows,
        summary,
        fits,
    })
}
