//! Support estimation for planar point samples with r-convex hulls.
//!
//! The shape parameter `r` is chosen from the data by testing r-convexity with a
//! maximal-spacing statistic and bisecting on the largest accepted radius.

pub mod density;
pub mod error;
pub mod geom;
pub mod seed;
pub mod select;
pub mod sim;
pub mod serde_f64;
pub mod spacing;

pub use error::{Error, Result};
pub use density::{BandwidthRule, DensityField};
pub use geom::{build_index, convex_hull, r_convex_hull, HullRegion, Point, PointSet};
pub use select::{estimate_support, select_r0, Fallback, SelectionConfig, SelectionResult};
pub use spacing::{critical_value, test_r_convexity, TestResult};
