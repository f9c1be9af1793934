//! Geometry kernels used by the augmentation engine.

pub mod contour;
pub mod curvature;
pub mod distance;
pub mod kmeans;
pub mod normal;
pub mod peaks;
pub mod raster;
pub mod savgol;

pub use contour::{trace_outer_contour, Contour};
pub use curvature::{curvature_profile, CurvatureParams, CurvatureProfile};
pub use distance::{distance_transform, region_distance_field, BinaryGrid, DistanceField};
pub use kmeans::{select_apices_kmeans, Apex};
pub use normal::{inward_support, outward_normal};
pub use peaks::detect_apices;
pub use raster::{fan_directions, fill_polygon, rasterize_fan_polygon, FanPolygon};
pub use savgol::{sg_smooth_circular, SavGol};
