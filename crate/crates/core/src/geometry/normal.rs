//! Outward normals from the distance field and inward radial support.

use crate::error::GeometryError;
use crate::geometry::distance::DistanceField;
use crate::labelmap::Region;

/// Step of the inward ray march, in pixels.
pub const RAY_STEP: f64 = 0.5;

/// Unit outward normal at apex `a = [x, y]`.
///
/// Uses the central-difference gradient of `field` (zero on the region, growing
/// outward) when its norm exceeds `eps`, otherwise the direction from the
/// region centroid to `a`.
pub fn outward_normal(
    field: &DistanceField,
    a: [f64; 2],
    region: &Region,
    eps: f64,
) -> Result<[f64; 2], GeometryError> {
    let col = a[0].round() as isize;
    let row = a[1].round() as isize;
    let sample = |r: isize, c: isize| {
        field
            .at(r, c)
            .unwrap_or_else(|| field.at(row, col).unwrap_or(0.0))
    };
    let gx = (sample(row, col + 1) - sample(row, col - 1)) / 2.0;
    let gy = (sample(row + 1, col) - sample(row - 1, col)) / 2.0;
    let norm = (gx * gx + gy * gy).sqrt();
    if norm > eps {
        return Ok([gx / norm, gy / norm]);
    }
    let (cr, cc) = region.centroid();
    let ox = a[0] - cc;
    let oy = a[1] - cr;
    let onorm = (ox * ox + oy * oy).sqrt();
    if onorm > eps {
        return Ok([ox / onorm, oy / onorm]);
    }
    Err(GeometryError::DegenerateNormal { x: a[0], y: a[1] })
}

/// Length of the contiguous run of region pixels met when walking from `a`
/// along `-u`, marched in half-pixel steps with nearest-pixel lookup and the
/// last inside parameter rounded to whole pixels. Zero when `a` itself is
/// outside or the first step leaves the region.
pub fn inward_support(region: &Region, a: [f64; 2], u: [f64; 2]) -> f64 {
    let inside = |t: f64| {
        let x = a[0] - t * u[0];
        let y = a[1] - t * u[1];
        region.contains(y.round() as isize, x.round() as isize)
    };
    if !inside(0.0) {
        return 0.0;
    }
    let b = region.bbox();
    let limit = ((b.width() + b.height()) as f64 + 2.0) / RAY_STEP;
    let mut last = 0.0;
    let mut k = 1usize;
    while (k as f64) <= limit {
        let t = k as f64 * RAY_STEP;
        if !inside(t) {
            break;
        }
        last = t;
        k += 1;
    }
    last.round()
}
