//! Planar geometry: triangulation, r-convex hulls, region queries and set metrics.

pub mod arcs;
pub mod edge;
pub mod hull;
pub mod index;
pub mod metrics;
pub mod point;

pub use edge::{Edge, Loop};
pub use hull::{
    area, build_index, connected_components, convex_hull, distance_to_boundary, r_convex_hull,
    Component, FreeSet, HullRegion, RegionKind,
};
pub use index::TriangulationIndex;
pub use metrics::{
    boundary_hausdorff, distance_in_measure, hausdorff, Bounded, MeasureEstimate, PointCloud,
    Shape,
};
pub use point::{BBox, Point, PointSet};
