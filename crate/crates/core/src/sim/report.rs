//! Experiment reports: per-replicate rows, per-setting summaries and slope fits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::select::Fallback;

/// One replicate at one setting. Fields not produced by a study are omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub n: usize,
    pub replicate: usize,
    /// Seed the sample was drawn with.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r_hat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<Fallback>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_h_boundary: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_mu: Option<f64>,
}

/// Summary over the replicates at one setting.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_rate: Option<f64>,
    /// Binomial standard error `sqrt(p (1 - p) / R)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r_hat_median: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r_hat_q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r_hat_q3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::serde_f64::option")]
    pub r_hat_iqr: Option<f64>,
    /// Fraction of replicates whose `r_hat` falls in the study's target band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_hat_in_band: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallbacks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_h_median: Option<f64>,
    /// Standard error of the median, `1.2533 * (IQR / 1.349) / sqrt(R)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_h_median_se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_h_boundary_median: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_mu_median: Option<f64>,
}

/// Least-squares fit of `log(metric)` on `log(log n / n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub metric: String,
    pub slope: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub points: usize,
}

impl SlopeFit {
    /// Ordinary least squares with the residual-based slope standard error.
    pub fn fit(metric: &str, xs: &[f64], ys: &[f64]) -> Option<SlopeFit> {
        let k = xs.len();
        if k < 2 || ys.len() != k {
            return None;
        }
        let kf = k as f64;
        let mx = xs.iter().sum::<f64>() / kf;
        let my = ys.iter().sum::<f64>() / kf;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if !(sxx > 0.0) {
            return None;
        }
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let std_error = if k > 2 {
            let rss: f64 = xs
                .iter()
                .zip(ys)
                .map(|(x, y)| (y - intercept - slope * x).powi(2))
                .sum();
            (rss / (kf - 2.0) / sxx).sqrt()
        } else {
            f64::NAN
        };
        Some(SlopeFit {
            metric: metric.to_string(),
            slope,
            std_error,
            intercept,
            points: k,
        })
    }
}

/// Output of a simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// `level-power`, `consistency` or `rate`.
    pub kind: String,
    pub config: serde_json::Value,
    pub replicates: usize,
    /// Base seed. Replicate seeds are listed in `rows` and follow `seed_rule`.
    pub seed: u64,
    pub seed_rule: String,
    pub rows: Vec<ReplicateRow>,
    pub summary: Vec<SummaryRow>,
    #[serde(default)]
    pub fits: Vec<SlopeFit>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn fit(&self, metric: &str) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }

    /// Per-replicate rows as CSV with a fixed header; missing fields are empty.
    pub fn rows_csv(&self) -> String {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        let mut out = String::from("n,replicate,seed,r,reject,v_hat,r_hat,fallback,components,d_h,d_h_boundary,d_mu\n");
        for row in &self.rows {
            let fallback = row.fallback.map(|f| {
                serde_json::to_value(f)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default()
            });
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                row.n,
                row.replicate,
                row.seed,
                opt(&row.r),
                opt(&row.reject),
                opt(&row.v_hat),
                opt(&row.r_hat),
                opt(&fallback),
                opt(&row.components),
                opt(&row.d_h),
                opt(&row.d_h_boundary),
                opt(&row.d_mu),
            );
        }
        out
    }
}

/// Quantile with linear interpolation between order statistics.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi || sorted[hi] == sorted[lo] {
        return sorted[lo];
    }
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn sorted(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_zero_error() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x - 1.0).collect();
        let f = SlopeFit::fit("m", &xs, &ys).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-14);
        assert!(f.std_error < 1e-12);
    }

    #[test]
    fn quantiles() {
        let s = sorted([4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!(quantile(&s, 0.5), 3.0);
        assert_eq!(quantile(&s, 0.25), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
    }
}
