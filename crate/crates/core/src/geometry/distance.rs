//! Exact Euclidean distance transform (Meijster et al. two-pass scheme).

use crate::error::GeometryError;
use crate::labelmap::Region;

/// Boolean grid, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryGrid {
            width,
            height,
            cells: vec![false; width * height],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: bool) {
        self.cells[row * self.width + col] = v;
    }
}

/// Distances from each cell to the nearest reference cell.
///
/// `origin` places the field in a larger coordinate frame: local cell
/// `(r, c)` sits at global `(origin.0 + r, origin.1 + c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    pub width: usize,
    pub height: usize,
    pub origin: (isize, isize),
    pub values: Vec<f64>,
}

impl DistanceField {
    #[inline]
    pub fn local(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Distance at global coordinates, `None` outside the field.
    pub fn at(&self, row: isize, col: isize) -> Option<f64> {
        let r = row - self.origin.0;
        let c = col - self.origin.1;
        if r < 0 || c < 0 || r as usize >= self.height || c as usize >= self.width {
            None
        } else {
            Some(self.local(r as usize, c as usize))
        }
    }
}

/// Squared Euclidean distance to the nearest `true` cell, exact in integers.
pub fn squared_distance_transform(mask: &BinaryGrid) -> Result<Vec<u64>, GeometryError> {
    let (w, h) = (mask.width, mask.height);
    if !mask.cells.iter().any(|&b| b) {
        return Err(GeometryError::EmptyReferenceSet);
    }
    let inf = (w + h) as i64;
    // Phase 1: vertical distance to nearest reference in each column.
    let mut g = vec![0i64; w * h];
    for x in 0..w {
        g[x] = if mask.get(0, x) { 0 } else { inf };
        for y in 1..h {
            g[y * w + x] = if mask.get(y, x) {
                0
            } else {
                g[(y - 1) * w + x] + 1
            };
        }
        for y in (0..h.saturating_sub(1)).rev() {
            let below = g[(y + 1) * w + x];
            if below < g[y * w + x] {
                g[y * w + x] = below + 1;
            }
        }
    }
    // Phase 2: lower envelope of parabolas along each row.
    let mut out = vec![0u64; w * h];
    let mut s = vec![0i64; w];
    let mut t = vec![0i64; w];
    for y in 0..h {
        let row = &g[y * w..(y + 1) * w];
        let f = |x: i64, i: i64| (x - i) * (x - i) + row[i as usize] * row[i as usize];
        let sep = |i: i64, u: i64| {
            let gi = row[i as usize];
            let gu = row[u as usize];
            (u * u - i * i + gu * gu - gi * gi).div_euclid(2 * (u - i))
        };
        let mut q: i64 = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..w as i64 {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let wv = 1 + sep(s[q as usize], u);
                if wv < w as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = wv;
                }
            }
        }
        for u in (0..w as i64).rev() {
            out[y * w + u as usize] = f(u, s[q as usize]) as u64;
            if u == t[q as usize] {
                q -= 1;
            }
        }
    }
    Ok(out)
}

/// Euclidean distance from every cell to the nearest `true` cell.
pub fn distance_transform(mask: &BinaryGrid) -> Result<DistanceField, GeometryError> {
    let sq = squared_distance_transform(mask)?;
    Ok(DistanceField {
        width: mask.width,
        height: mask.height,
        origin: (0, 0),
        values: sq.into_iter().map(|v| (v as f64).sqrt()).collect(),
    })
}

/// Distance to the region on its bounding box padded by `pad` pixels. The
/// field is zero on the region and grows outward.
pub fn region_distance_field(region: &Region, pad: usize) -> DistanceField {
    let b = region.bbox();
    let w = b.width() + 2 * pad;
    let h = b.height() + 2 * pad;
    let mut grid = BinaryGrid::new(w, h);
    for &(r, c) in region.pixels() {
        grid.set(r - b.min_row + pad, c - b.min_col + pad, true);
    }
    let mut field = distance_transform(&grid).expect("region has at least one pixel");
    field.origin = (
        b.min_row as isize - pad as isize,
        b.min_col as isize - pad as isize,
    );
    field
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_reference() {
        let mut g = BinaryGrid::new(3, 3);
        g.set(0, 0, true);
        let d = distance_transform(&g).unwrap();
        assert_eq!(d.local(2, 2), 2.0 * 2f64.sqrt());
        assert_eq!(d.local(0, 2), 2.0);
        assert_eq!(d.local(1, 2), 5f64.sqrt());
    }

    #[test]
    fn full_reference_is_zero() {
        let g = BinaryGrid {
            width: 4,
            height: 2,
            cells: vec![true; 8],
        };
        assert!(distance_transform(&g)
            .unwrap()
            .values
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn empty_reference_is_error() {
        assert_eq!(
            distance_transform(&BinaryGrid::new(3, 3)),
            Err(GeometryError::EmptyReferenceSet)
        );
    }

    #[test]
    fn single_row_and_column() {
        let mut g = BinaryGrid::new(6, 1);
        g.set(0, 4, true);
        let d = distance_transform(&g).unwrap();
        assert_eq!(d.values, vec![4.0, 3.0, 2.0, 1.0, 0.0, 1.0]);
        let mut g = BinaryGrid::new(1, 5);
        g.set(1, 0, true);
        let d = distance_transform(&g).unwrap();
        assert_eq!(d.values, vec![1.0, 0.0, 1.0, 2.0, 3.0]);
    }
}
