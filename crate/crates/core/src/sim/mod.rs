//! Synthetic-truth experiments: samplers on known supports, level and power studies,
//! selector consistency runs and the convergence-rate regression.

mod report;
mod study;
mod support;

pub use report::{ExperimentReport, ReplicateRow, SlopeFit, SummaryRow};
pub use study::{
    consistency_study, level_power_study, rate_study, ConsistencyConfig, LevelPowerConfig, RateConfig,
};
pub use support::{DensityBounds, DiscSpec, SyntheticDensity, SyntheticSupport};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{Point, PointSet, Shape};

/// `n` i.i.d. draws from `density` on `support` by rejection from the bounding box.
pub fn sample(
    support: &SyntheticSupport,
    density: &SyntheticDensity,
    n: usize,
    seed: u64,
) -> Result<PointSet> {
    support.validate()?;
    density.validate()?;
    if !(support.area() > 0.0) {
        return Err(Error::DegenerateSupport);
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let bb = support.bbox();
    let f1 = density.bounds(support).f1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = Point::new(
            bb.min.x + rng.random::<f64>() * bb.width(),
            bb.min.y + rng.random::<f64>() * bb.height(),
        );
        let u: f64 = rng.random();
        if support.contains(x) && u * f1 <= density.eval(support, x) {
            out.push(x);
        }
    }
    PointSet::new(out)
}
