//! Outer boundary tracing by Moore-neighbour following.

use crate::error::GeometryError;
use crate::labelmap::Region;

/// Closed boundary of a region as pixel-centre coordinates `[x, y]`
/// (`x` = column, `y` = row), oriented so that the shoelace area is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    points: Vec<[f64; 2]>,
}

impl Contour {
    /// Wraps a point list, reversing it (keeping the first point) if its
    /// signed area is negative.
    pub fn new(points: Vec<[f64; 2]>) -> Contour {
        let mut c = Contour { points };
        c.normalize_orientation();
        c
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Fewer than three points: nothing to smooth or differentiate.
    pub fn is_degenerate(&self) -> bool {
        self.points.len() < 3
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[1]).collect()
    }

    /// Shoelace area in the `(x, y)` frame.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    fn normalize_orientation(&mut self) {
        if self.points.len() > 2 && self.signed_area() < 0.0 {
            self.points[1..].reverse();
        }
    }
}

pub fn signed_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = points[i];
        let b = points[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

// Clockwise on screen (y down), starting east.
const DIRS: [(isize, isize); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

fn dir_index(dr: isize, dc: isize) -> usize {
    DIRS.iter()
        .position(|&d| d == (dr, dc))
        .expect("offset between 8-neighbours")
}

/// Traces the outer boundary of `region` starting at its topmost-then-leftmost
/// pixel. Holes are ignored. A one-pixel region yields a one-point contour.
pub fn trace_outer_contour(region: &Region) -> Result<Contour, GeometryError> {
    if region.area() == 0 {
        return Err(GeometryError::DegenerateRegion);
    }
    let start = region.pixels()[0];
    let start = (start.0 as isize, start.1 as isize);
    let inside = |p: (isize, isize)| region.contains(p.0, p.1);

    let mut points = vec![start];
    // The west neighbour of the first pixel in raster order is background.
    let mut cur = start;
    let mut back = (start.0, start.1 - 1);
    let mut first_step: Option<(isize, isize)> = None;
    let max_steps = 4 * region.area() + 8;
    for _ in 0..max_steps {
        let bd = dir_index(back.0 - cur.0, back.1 - cur.1);
        let mut next = None;
        let mut prev = back;
        for k in 1..=8 {
            let d = DIRS[(bd + k) % 8];
            let cand = (cur.0 + d.0, cur.1 + d.1);
            if inside(cand) {
                next = Some(cand);
                break;
            }
            prev = cand;
        }
        let Some(next) = next else {
            // isolated pixel
            break;
        };
        if cur == start {
            match first_step {
                Some(fs) if fs == next => break,
                Some(_) => {}
                None => first_step = Some(next),
            }
        }
        points.push(next);
        back = prev;
        cur = next;
    }
    // The walk ends by re-entering the start pixel.
    if points.len() > 1 && points.last() == Some(&start) {
        points.pop();
    }
    let pts = points
        .into_iter()
        .map(|(r, c)| [c as f64, r as f64])
        .collect();
    Ok(Contour::new(pts))
}
