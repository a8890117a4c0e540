use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point set is empty")]
    EmptyPointSet,
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),
    #[error("duplicate points at indices {0} and {1}")]
    DuplicatePoints(usize, usize),
    #[error("triangulation dropped point {0} (near-duplicate of another sample)")]
    DegenerateTriangulation(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("bandwidth must be positive, got {0}")]
    NonpositiveBandwidth(f64),
    #[error("significance level must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("sample too small: need at least {needed} points, got {got}")]
    SampleTooSmall { needed: usize, got: usize },
    #[error("region is empty")]
    EmptyRegion,
    #[error("empty input set")]
    EmptyInput,
    #[error("support has zero area")]
    DegenerateSupport,
    #[error("invalid endpoints: r_min = {r_min} must be positive and smaller than r_max = {r_max}")]
    InvalidEndpoints { r_min: f64, r_max: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
