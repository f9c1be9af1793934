//! Signed curvature of a smoothed closed contour and the radial boost.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::geometry::contour::Contour;
use crate::geometry::savgol::{fit_window, sg_smooth_circular};

/// Parameters for smoothing and differentiating a contour.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureParams {
    /// Savitzky–Golay window (odd).
    pub window: usize,
    /// Savitzky–Golay polynomial order.
    pub poly_order: usize,
    /// Index offset of the central differences.
    pub step: usize,
    /// Regulariser of the curvature denominator and the boost.
    pub eps: f64,
    /// Radial boost strength; 0 disables the boost.
    pub radial_boost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureProfile {
    pub kappa: Vec<f64>,
    /// `max(0, kappa)` after the radial boost, clamped to be non-negative.
    pub kappa_plus: Vec<f64>,
    pub smoothed_x: Vec<f64>,
    pub smoothed_y: Vec<f64>,
    /// Distance of each smoothed point to `centroid`.
    pub radii: Vec<f64>,
    /// Mean of the smoothed points, `[x, y]`.
    pub centroid: [f64; 2],
    /// Window and order actually used after fitting to the contour length.
    pub window_used: (usize, usize),
}

impl CurvatureProfile {
    pub fn len(&self) -> usize {
        self.kappa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kappa.is_empty()
    }
}

/// Periodic central difference with index offset `step`.
pub fn central_difference(signal: &[f64], step: usize) -> Vec<f64> {
    let n = signal.len();
    let s = step % n.max(1);
    (0..n)
        .map(|t| (signal[(t + s) % n] - signal[(t + n - s) % n]) / (2.0 * step as f64))
        .collect()
}

/// Signed curvature `(x'y'' - y'x'') / ((x'^2 + y'^2)^{3/2} + eps)`.
pub fn signed_curvature(x: &[f64], y: &[f64], step: usize, eps: f64) -> Vec<f64> {
    let dx = central_difference(x, step);
    let dy = central_difference(y, step);
    let ddx = central_difference(&dx, step);
    let ddy = central_difference(&dy, step);
    (0..x.len())
        .map(|t| {
            let speed2 = dx[t] * dx[t] + dy[t] * dy[t];
            (dx[t] * ddy[t] - dy[t] * ddx[t]) / (speed2 * speed2.sqrt() + eps)
        })
        .collect()
}

/// Multiplies `kappa_plus` by `1 + rho (r_t - mean r) / (std r + eps)` and
/// clamps the result at zero.
pub fn radial_boost(kappa_plus: &[f64], radii: &[f64], rho: f64, eps: f64) -> Vec<f64> {
    if rho == 0.0 {
        return kappa_plus.to_vec();
    }
    let n = radii.len() as f64;
    let mean = radii.iter().sum::<f64>() / n;
    let var = radii.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    kappa_plus
        .iter()
        .zip(radii)
        .map(|(k, r)| (k * (1.0 + rho * (r - mean) / (sd + eps))).max(0.0))
        .collect()
}

/// Smooths the contour, differentiates it and returns curvature arrays.
///
/// Contours shorter than twice the window use a reduced window, see
/// [`fit_window`].
pub fn curvature_profile(
    contour: &Contour,
    params: &CurvatureParams,
) -> Result<CurvatureProfile, GeometryError> {
    let n = contour.len();
    if n < 3 {
        return Err(GeometryError::TooShort(n));
    }
    let (w, p) = fit_window(params.window, params.poly_order, n);
    if (w, p) != (params.window, params.poly_order) {
        log::debug!(
            "contour of {n} points: smoothing window {}->{w}, order {}->{p}",
            params.window,
            params.poly_order
        );
    }
    let (sx, sy) = sg_smooth_circular(&contour.xs(), &contour.ys(), w, p)?;
    let step = params.step.max(1);
    let kappa = signed_curvature(&sx, &sy, step, params.eps);
    let cx = sx.iter().sum::<f64>() / n as f64;
    let cy = sy.iter().sum::<f64>() / n as f64;
    let radii: Vec<f64> = sx
        .iter()
        .zip(&sy)
        .map(|(x, y)| ((x - cx).powi(2) + (y - cy).powi(2)).sqrt())
        .collect();
    let clamped: Vec<f64> = kappa.iter().map(|k| k.max(0.0)).collect();
    let kappa_plus = radial_boost(&clamped, &radii, params.radial_boost, params.eps);
    Ok(CurvatureProfile {
        kappa,
        kappa_plus,
        smoothed_x: sx,
        smoothed_y: sy,
        radii,
        centroid: [cx, cy],
        window_used: (w, p),
    })
}
