//! Data-driven choice of the shape parameter by bisection on the r-convexity test.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::density::{BandwidthRule, DensityField, Gaussian};
use crate::error::{Error, Result};
use crate::geom::{convex_hull, r_convex_hull, HullRegion, Point, TriangulationIndex};
use crate::spacing::{CandidateSet, TestResult};

/// Bisection cannot resolve more than this many halvings of a double-precision bracket.
pub const MAX_ITERATIONS: u32 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub alpha: f64,
    /// Number of bisection steps `I`.
    pub max_iterations: u32,
    /// Largest acceptable number of connected components `C`.
    pub max_components: usize,
    /// Lower starting radius; half the smallest nearest-neighbour distance when unset.
    pub r_min: Option<f64>,
    /// Upper starting radius; the sample diameter when unset.
    pub r_max: Option<f64>,
    /// The estimate is built at `nu * r_hat`.
    pub nu: f64,
    pub bandwidth: BandwidthRule,
    /// Candidate centres per circle.
    pub angular_samples: usize,
    /// How many times `r_max` may be doubled while looking for a rejection.
    pub max_expansions: u32,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            alpha: 0.01,
            max_iterations: 20,
            max_components: 4,
            r_min: None,
            r_max: None,
            nu: 1.0,
            bandwidth: BandwidthRule::default(),
            angular_samples: 128,
            max_expansions: 8,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if self.max_iterations == 0 || self.max_iterations > MAX_ITERATIONS {
            return Err(Error::InvalidConfig(format!(
                "iterations must lie in 1..={MAX_ITERATIONS}"
            )));
        }
        if self.max_components == 0 {
            return Err(Error::InvalidConfig("max_components must be at least 1".into()));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::InvalidConfig("nu must lie in (0, 1]".into()));
        }
        if self.angular_samples == 0 {
            return Err(Error::InvalidConfig("angular_samples must be positive".into()));
        }
        if let Some(h) = self.bandwidth.explicit {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::NonpositiveBandwidth(h));
            }
        }
        if !(self.bandwidth.h0 > 0.0 && self.bandwidth.h0.is_finite()) {
            return Err(Error::NonpositiveBandwidth(self.bandwidth.h0));
        }
        for r in [self.r_min, self.r_max].into_iter().flatten() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidRadius(r));
            }
        }
        if let (Some(lo), Some(hi)) = (self.r_min, self.r_max) {
            if lo >= hi {
                return Err(Error::InvalidEndpoints {
                    r_min: lo,
                    r_max: hi,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    None,
    ComponentCap,
    ConvexHull,
}

/// One test evaluation made by the selector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    #[serde(with = "crate::serde_f64")]
    pub r: f64,
    pub reject: bool,
    pub components: usize,
    pub v_hat: f64,
    pub m_r: f64,
    /// Bracket after this step (bisection steps only).
    pub r_lo: f64,
    pub r_hi: f64,
}

impl TraceStep {
    fn new(t: &TestResult, lo: f64, hi: f64) -> Self {
        TraceStep {
            r: t.r,
            reject: t.reject,
            components: t.components_at_r,
            v_hat: t.statistic.v_hat,
            m_r: t.statistic.m_r,
            r_lo: lo,
            r_hi: hi,
        }
    }
}

/// Outcome of endpoint validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Endpoints {
    /// A valid bracket: the test accepts at `r_min` and rejects at `r_max`.
    Bracket { r_min: f64, r_max: f64 },
    /// Every admissible radius is rejected; use the smallest radius with few components.
    ComponentCap { r: f64 },
    /// No radius is rejected; use the convex hull.
    ConvexHull,
}

/// Summary of the fitted support.
#[derive(Debug)]
pub struct SupportEstimate {
    pub region: HullRegion,
    pub components: usize,
    pub area: f64,
    pub sample_hash: String,
}

impl SupportEstimate {
    /// Boundary loops as closed polylines whose chords stay within `tol` of the arcs.
    pub fn polylines(&self, tol: f64) -> Vec<Vec<Point>> {
        self.region
            .components()
            .iter()
            .flat_map(|c| c.loops())
            .map(|l| l.flatten(tol))
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct SelectionResult {
    /// `+inf` under the convex-hull fallback.
    #[serde(with = "crate::serde_f64")]
    pub r_hat: f64,
    /// Radius of the returned region, `nu * r_hat`.
    #[serde(with = "crate::serde_f64")]
    pub r_used: f64,
    pub fallback: Fallback,
    pub bandwidth: Option<f64>,
    pub c_crit: f64,
    /// Bracket at the start of the bisection, when one was found.
    pub bracket: Option<(f64, f64)>,
    /// Bracket after the last bisection step.
    pub final_bracket: Option<(f64, f64)>,
    /// `(r_hi - r_lo) / 2^I` for the starting bracket.
    pub bracket_width: Option<f64>,
    /// Tests made while validating the endpoints.
    pub endpoint_checks: Vec<TraceStep>,
    /// Bisection steps, at most `max_iterations`.
    pub trace: Vec<TraceStep>,
    pub components: usize,
    pub area: f64,
    pub sample_hash: String,
    pub config: SelectionConfig,
    #[serde(skip)]
    pub support: SupportEstimate,
}

impl SelectionResult {
    /// Canonical JSON form (fixed field order, shortest round-trip float formatting).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selection result serializes")
    }
}

/// Half the smallest nearest-neighbour distance.
pub fn default_r_min(index: &TriangulationIndex) -> f64 {
    let pts = index.points().points();
    let mut best = f64::INFINITY;
    for (i, &p) in pts.iter().enumerate() {
        for &j in index.neighbors(i) {
            best = best.min(p.dist(pts[j]));
        }
    }
    if best.is_finite() {
        0.5 * best
    } else {
        index.scale()
    }
}

/// Evaluates the test at given radii, remembering every result.
struct Tester<'a> {
    index: &'a Arc<TriangulationIndex>,
    candidates: CandidateSet,
    tests: HashMap<u64, TestResult>,
    components: HashMap<u64, usize>,
    hull: Option<TestResult>,
}

impl<'a> Tester<'a> {
    fn test(&mut self, r: f64) -> Result<TestResult> {
        if let Some(t) = self.tests.get(&r.to_bits()) {
            return Ok(t.clone());
        }
        let region = r_convex_hull(self.index, r)?;
        let t = self.candidates.evaluate(&region);
        self.components.insert(r.to_bits(), t.components_at_r);
        self.tests.insert(r.to_bits(), t.clone());
        Ok(t)
    }

    fn components(&mut self, r: f64) -> Result<usize> {
        if let Some(&c) = self.components.get(&r.to_bits()) {
            return Ok(c);
        }
        let c = r_convex_hull(self.index, r)?.component_count();
        self.components.insert(r.to_bits(), c);
        Ok(c)
    }

    fn test_hull(&mut self) -> TestResult {
        if let Some(t) = &self.hull {
            return t.clone();
        }
        let t = self.candidates.evaluate(&convex_hull(self.index));
        self.hull = Some(t.clone());
        t
    }
}

/// Checks the starting radii and decides between bisection and the two fallbacks.
///
/// The upper radius must be rejected; it is doubled up to `max_expansions` times when it
/// is not, after checking that the convex hull itself is rejected. The lower radius must be
/// accepted with at most `max_components` components; it is raised to the smallest radius
/// with few enough components (component counts only drop as `r` grows).
fn validate_endpoints_with(
    tester: &mut Tester,
    r_min: f64,
    r_max: f64,
    config: &SelectionConfig,
    checks: &mut Vec<TraceStep>,
) -> Result<Endpoints> {
    if !(r_min > 0.0 && r_min < r_max) {
        return Err(Error::InvalidEndpoints { r_min, r_max });
    }

    let mut hi = r_max;
    let mut t = tester.test(hi)?;
    checks.push(TraceStep::new(&t, r_min, hi));
    if !t.reject {
        let h = tester.test_hull();
        checks.push(TraceStep::new(&h, r_min, hi));
        if !h.reject {
            return Ok(Endpoints::ConvexHull);
        }
        let mut k = 0;
        while !t.reject {
            if k == config.max_expansions {
                return Ok(Endpoints::ConvexHull);
            }
            hi *= 2.0;
            k += 1;
            t = tester.test(hi)?;
            checks.push(TraceStep::new(&t, r_min, hi));
        }
    }

    let mut lo = r_min;
    if tester.components(lo)? > config.max_components {
        // Smallest radius with at most C components, to relative precision 2^-40.
        let (mut a, mut b) = (lo, hi);
        if tester.components(b)? > config.max_components {
            return Ok(Endpoints::ComponentCap { r: b });
        }
        while b - a > 1e-12 * b {
            let mid = 0.5 * (a + b);
            if tester.components(mid)? > config.max_components {
                a = mid;
            } else {
                b = mid;
            }
        }
        lo = b;
    }
    let t = tester.test(lo)?;
    checks.push(TraceStep::new(&t, lo, hi));
    if t.reject {
        return Ok(Endpoints::ComponentCap { r: lo });
    }
    Ok(Endpoints::Bracket {
        r_min: lo,
        r_max: hi,
    })
}

/// Endpoint validation on its own (see [`select_r0`]).
pub fn validate_endpoints(
    index: &Arc<TriangulationIndex>,
    config: &SelectionConfig,
) -> Result<Endpoints> {
    config.validate()?;
    let field = DensityField::estimate(index, &config.bandwidth, &Gaussian)?;
    let mut tester = Tester {
        index,
        candidates: CandidateSet::build(&field, config.alpha, config.angular_samples)?,
        tests: HashMap::new(),
        components: HashMap::new(),
        hull: None,
    };
    let (lo, hi) = resolve_radii(index, config)?;
    validate_endpoints_with(&mut tester, lo, hi, config, &mut Vec::new())
}

fn resolve_radii(index: &TriangulationIndex, config: &SelectionConfig) -> Result<(f64, f64)> {
    let lo = config.r_min.unwrap_or_else(|| default_r_min(index));
    let hi = config.r_max.unwrap_or_else(|| index.points().diameter());
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidEndpoints {
            r_min: lo,
            r_max: hi,
        });
    }
    Ok((lo, hi))
}

/// Selects `r_hat` and builds the support estimate at `nu * r_hat`.
///
/// Bisection keeps the test accepted at the lower end and rejected at the upper end.
/// Midpoints are taken on the dyadic grid `r_lo + k (r_hi - r_lo) / 2^I`, so after `I`
/// steps the bracket width is exactly `(r_hi - r_lo) / 2^I`.
pub fn select_r0(index: &Arc<TriangulationIndex>, config: &SelectionConfig) -> Result<SelectionResult> {
    config.validate()?;
    let n = index.len();
    if n < 3 {
        return Err(Error::SampleTooSmall { needed: 3, got: n });
    }
    let field = DensityField::estimate(index, &config.bandwidth, &Gaussian)?;
    select_with_field(index, &field, config)
}

/// [`select_r0`] with a given density field.
pub fn select_with_field(
    index: &Arc<TriangulationIndex>,
    field: &DensityField,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    config.validate()?;
    let candidates = CandidateSet::build(field, config.alpha, config.angular_samples)?;
    let c_crit = candidates.c_crit;
    let mut tester = Tester {
        index,
        candidates,
        tests: HashMap::new(),
        components: HashMap::new(),
        hull: None,
    };
    let (lo, hi) = resolve_radii(index, config)?;
    let mut checks = Vec::new();
    let endpoints = validate_endpoints_with(&mut tester, lo, hi, config, &mut checks)?;

    let mut trace = Vec::new();
    let mut final_bracket = None;
    let mut bracket_width = None;
    let (r_hat, fallback, bracket) = match endpoints {
        Endpoints::ConvexHull => (f64::INFINITY, Fallback::ConvexHull, None),
        Endpoints::ComponentCap { r } => (r, Fallback::ComponentCap, None),
        Endpoints::Bracket { r_min, r_max } => {
            let iters = config.max_iterations;
            let step = (r_max - r_min) / (1u64 << iters) as f64;
            let (mut a, mut b) = (0u64, 1u64 << iters);
            let at = |k: u64| if k == 1u64 << iters { r_max } else { r_min + k as f64 * step };
            for _ in 0..iters {
                let mid = (a + b) / 2;
                let t = tester.test(at(mid))?;
                if t.reject {
                    b = mid;
                } else {
                    a = mid;
                }
                trace.push(TraceStep::new(&t, at(a), at(b)));
            }
            final_bracket = Some((at(a), at(b)));
            bracket_width = Some((b - a) as f64 * step);
            (at(a), Fallback::None, Some((r_min, r_max)))
        }
    };

    let r_used = config.nu * r_hat;
    let region = if r_used.is_finite() {
        r_convex_hull(index, r_used)?
    } else {
        convex_hull(index)
    };
    let sample_hash = index.points().content_hash();
    let support = SupportEstimate {
        components: region.component_count(),
        area: region.area(),
        region,
        sample_hash: sample_hash.clone(),
    };
    Ok(SelectionResult {
        r_hat,
        r_used,
        fallback,
        bandwidth: field.bandwidth(),
        c_crit,
        bracket,
        final_bracket,
        bracket_width,
        endpoint_checks: checks,
        trace,
        components: support.components,
        area: support.area,
        sample_hash,
        config: config.clone(),
        support,
    })
}

/// Runs the selector and returns the fitted support.
pub fn estimate_support(
    index: &Arc<TriangulationIndex>,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    select_r0(index, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_must_be_ordered() {
        let cfg = SelectionConfig {
            r_min: Some(1.0),
            r_max: Some(1.0),
            ..Default::default()
        };
        assert_eq!(
            cfg.validate().unwrap_err(),
            Error::InvalidEndpoints {
                r_min: 1.0,
                r_max: 1.0
            }
        );
    }

    #[test]
    fn config_roundtrips_through_json() {
        let cfg = SelectionConfig {
            r_max: Some(2.5),
            ..Default::default()
        };
        let s = serde_json::to_string(&cfg).unwrap();
        let back: SelectionConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(cfg, back);
        let partial: SelectionConfig = serde_json::from_str(r#"{"alpha": 0.05}"#).unwrap();
        assert_eq!(partial.max_components, 4);
    }
}
