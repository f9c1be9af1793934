//! Rigid moves and pasting.

use crate::error::EngineError;
use crate::labelmap::{ClassId, LabelMap, Region};

/// A region held in a local frame so that rotation and bulging never clip it.
/// Canvas coordinates are local coordinates plus `origin` (`(row, col)`).
#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    pub region: Region,
    pub origin: (isize, isize),
}

impl Shape {
    /// Wraps a canvas region with `pad` pixels of headroom on the low sides.
    pub fn from_region(region: &Region, pad: usize) -> Shape {
        let b = region.bbox();
        let origin = (
            b.min_row as isize - pad as isize,
            b.min_col as isize - pad as isize,
        );
        shape_from_canvas(
            region.class(),
            region
                .pixels()
                .iter()
                .map(|&(r, c)| (r as isize, c as isize)),
            origin,
        )
        .expect("non-empty region")
    }

    pub fn canvas_pixels(&self) -> impl Iterator<Item = (isize, isize)> + '_ {
        let (or, oc) = self.origin;
        self.region
            .pixels()
            .iter()
            .map(move |&(r, c)| (r as isize + or, c as isize + oc))
    }

    /// Centroid in canvas coordinates, `(row, col)`.
    pub fn canvas_centroid(&self) -> (f64, f64) {
        let (r, c) = self.region.centroid();
        (r + self.origin.0 as f64, c + self.origin.1 as f64)
    }

    pub fn translated(&self, d_row: isize, d_col: isize) -> Shape {
        Shape {
            region: self.region.clone(),
            origin: (self.origin.0 + d_row, self.origin.1 + d_col),
        }
    }

    /// True when every pixel lies on a `width` x `height` canvas.
    pub fn fits(&self, width: usize, height: usize) -> bool {
        let b = self.region.bbox();
        let (or, oc) = self.origin;
        b.min_row as isize + or >= 0
            && b.min_col as isize + oc >= 0
            && b.max_row as isize + or < height as isize
            && b.max_col as isize + oc < width as isize
    }

    /// The part of the shape on the canvas, or `None` if nothing remains.
    pub fn clip_to_canvas(&self, width: usize, height: usize) -> Option<Region> {
        let px: Vec<(usize, usize)> = self
            .canvas_pixels()
            .filter(|&(r, c)| r >= 0 && c >= 0 && (r as usize) < height && (c as usize) < width)
            .map(|(r, c)| (r as usize, c as usize))
            .collect();
        Region::from_pixels(self.region.class(), px)
    }
}

fn shape_from_canvas(
    class: ClassId,
    pixels: impl Iterator<Item = (isize, isize)>,
    origin: (isize, isize),
) -> Option<Shape> {
    let local = pixels
        .map(|(r, c)| ((r - origin.0) as usize, (c - origin.1) as usize))
        .collect();
    Region::from_pixels(class, local).map(|region| Shape { region, origin })
}

/// Rotates `region` by `theta` about its centroid without cropping.
///
/// Every pixel of the rotated bounding box is mapped back through the inverse
/// rotation and takes the label of the nearest source pixel. Angles act on
/// `(x, y) = (col, row)` with `y` pointing down, so a positive angle turns
/// clockwise on screen. The result keeps `pad` pixels of headroom.
pub fn rotate_no_crop(region: &Region, theta: f64, pad: usize) -> Shape {
    let (cr, cc) = region.centroid();
    let b = region.bbox();
    let (s, c) = theta.sin_cos();
    let corners = [
        (b.min_row as f64 - 0.5, b.min_col as f64 - 0.5),
        (b.min_row as f64 - 0.5, b.max_col as f64 + 0.5),
        (b.max_row as f64 + 0.5, b.min_col as f64 - 0.5),
        (b.max_row as f64 + 0.5, b.max_col as f64 + 0.5),
    ];
    let (mut r_lo, mut r_hi, mut c_lo, mut c_hi) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (r, col) in corners {
        let (x, y) = (col - cc, r - cr);
        let xr = c * x - s * y;
        let yr = s * x + c * y;
        r_lo = r_lo.min(yr + cr);
        r_hi = r_hi.max(yr + cr);
        c_lo = c_lo.min(xr + cc);
        c_hi = c_hi.max(xr + cc);
    }
    let (r0, r1) = (r_lo.floor() as isize - 1, r_hi.ceil() as isize + 1);
    let (c0, c1) = (c_lo.floor() as isize - 1, c_hi.ceil() as isize + 1);

    let mut out = Vec::new();
    for r in r0..=r1 {
        for col in c0..=c1 {
            let (x, y) = (col as f64 - cc, r as f64 - cr);
            let sx = c * x + s * y + cc;
            let sy = -s * x + c * y + cr;
            if region.contains(sy.round() as isize, sx.round() as isize) {
                out.push((r, col));
            }
        }
    }
    if out.is_empty() {
        return Shape::from_region(region, pad);
    }
    let min_r = out.iter().map(|p| p.0).min().unwrap_or(0);
    let min_c = out.iter().map(|p| p.1).min().unwrap_or(0);
    let origin = (min_r - pad as isize, min_c - pad as isize);
    shape_from_canvas(region.class(), out.into_iter(), origin).expect("non-empty rotation")
}

/// Rotates `region` about its centroid by `theta`, then shifts it by
/// `delta = (d_col, d_row)`. Pixels falling off the `width` x `height` canvas
/// are dropped.
pub fn rigid_transform(
    region: &Region,
    theta: f64,
    delta: (isize, isize),
    width: usize,
    height: usize,
) -> Result<Region, EngineError> {
    rotate_no_crop(region, theta, 0)
        .translated(delta.1, delta.0)
        .clip_to_canvas(width, height)
        .ok_or(EngineError::OutOfCanvas { width, height })
}

/// Writes `region` onto `canvas` if every target pixel currently holds a
/// class from `allow` or the region's own class and none holds a class from
/// `forbid`. On rejection the canvas is untouched.
pub fn try_paste(
    canvas: &mut LabelMap,
    region: &Region,
    forbid: &[ClassId],
    allow: &[ClassId],
) -> bool {
    let class = region.class();
    let (w, h) = (canvas.width(), canvas.height());
    let ok = region.pixels().iter().all(|&(r, c)| {
        if r >= h || c >= w {
            return false;
        }
        let cur = canvas.get(r, c);
        !forbid.contains(&cur) && (cur == class || allow.contains(&cur))
    });
    if ok {
        for &(r, c) in region.pixels() {
            debug_assert!(!forbid.contains(&canvas.get(r, c)));
            canvas.set(r, c, class);
        }
    }
    ok
}

/// Writes `shape` centred on `centroid` (`(row, col)`), clipped to the canvas,
/// onto pixels currently labelled `fill`. Returns the number of pixels written.
pub fn restore_near_origin(
    canvas: &mut LabelMap,
    shape: &Shape,
    centroid: (f64, f64),
    fill: ClassId,
) -> usize {
    let (sr, sc) = shape.canvas_centroid();
    let moved = shape.translated(
        (centroid.0 - sr).round() as isize,
        (centroid.1 - sc).round() as isize,
    );
    let Some(region) = moved.clip_to_canvas(canvas.width(), canvas.height()) else {
        return 0;
    };
    let mut written = 0;
    for &(r, c) in region.pixels() {
        if canvas.get(r, c) == fill {
            canvas.set(r, c, region.class());
            written += 1;
        }
    }
    written
}
