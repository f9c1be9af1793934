//! Fan polygons and their inclusive scanline fill.

const EDGE_EPS: f64 = 1e-9;

/// `n_rays` unit directions obtained by rotating `normal` through angles
/// evenly spaced in `[-half_angle, half_angle]`.
pub fn fan_directions(normal: [f64; 2], half_angle: f64, n_rays: usize) -> Vec<[f64; 2]> {
    assert!(n_rays >= 2, "a fan needs at least two rays");
    (0..n_rays)
        .map(|k| {
            let phi = -half_angle + 2.0 * half_angle * k as f64 / (n_rays - 1) as f64;
            let (s, c) = phi.sin_cos();
            let v = [c * normal[0] - s * normal[1], s * normal[0] + c * normal[1]];
            let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
            [v[0] / len, v[1] / len]
        })
        .collect()
}

/// Filled polygon `[apex, apex + l_1 u_1, ..., apex + l_n u_n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FanPolygon {
    pub apex: [f64; 2],
    pub directions: Vec<[f64; 2]>,
    pub lengths: Vec<f64>,
    /// Covered pixels as `(row, col)`, possibly negative, sorted row-major.
    pub raster: Vec<(isize, isize)>,
}

impl FanPolygon {
    pub fn vertices(&self) -> Vec<[f64; 2]> {
        fan_vertices(self.apex, &self.directions, &self.lengths)
    }
}

fn fan_vertices(apex: [f64; 2], directions: &[[f64; 2]], lengths: &[f64]) -> Vec<[f64; 2]> {
    std::iter::once(apex)
        .chain(
            directions
                .iter()
                .zip(lengths)
                .map(|(u, l)| [apex[0] + l * u[0], apex[1] + l * u[1]]),
        )
        .collect()
}

/// Integer pixel centres `(row, col)` inside or on the boundary of a closed
/// polygon, by scanline. Crossings use the half-open rule; edges lying on a
/// scanline and single boundary touches are added explicitly.
pub fn fill_polygon(vertices: &[[f64; 2]]) -> Vec<(isize, isize)> {
    let n = vertices.len();
    if n == 0 {
        return Vec::new();
    }
    let ymin = vertices.iter().map(|v| v[1]).fold(f64::INFINITY, f64::min);
    let ymax = vertices
        .iter()
        .map(|v| v[1])
        .fold(f64::NEG_INFINITY, f64::max);
    let xmin = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
    let xmax = vertices
        .iter()
        .map(|v| v[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::new();
    let row_lo = (ymin - EDGE_EPS).ceil() as isize;
    let row_hi = (ymax + EDGE_EPS).floor() as isize;
    let mut spans: Vec<(f64, f64)> = Vec::new();
    let mut xs: Vec<f64> = Vec::new();
    for row in row_lo..=row_hi {
        let y = row as f64;
        spans.clear();
        xs.clear();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            // boundary contribution
            if (a[1] - y).abs() <= EDGE_EPS && (b[1] - y).abs() <= EDGE_EPS {
                spans.push((a[0].min(b[0]), a[0].max(b[0])));
            } else if (a[1] - y) * (b[1] - y) <= 0.0 {
                let x = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
                spans.push((x, x));
            }
            // interior crossings, half-open in y
            if (a[1] <= y) != (b[1] <= y) {
                xs.push(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            spans.push((pair[0], pair[1]));
        }
        let mut cols: Vec<isize> = Vec::new();
        for &(lo, hi) in &spans {
            let lo = lo.max(xmin);
            let hi = hi.min(xmax);
            let c0 = (lo - EDGE_EPS).ceil() as isize;
            let c1 = (hi + EDGE_EPS).floor() as isize;
            cols.extend(c0..=c1);
        }
        cols.sort_unstable();
        cols.dedup();
        out.extend(cols.into_iter().map(|c| (row, c)));
    }
    out
}

/// Rasterizes the fan polygon closed at `apex`. All-zero lengths give the
/// apex pixel alone.
pub fn rasterize_fan_polygon(
    apex: [f64; 2],
    directions: &[[f64; 2]],
    lengths: &[f64],
) -> FanPolygon {
    assert_eq!(directions.len(), lengths.len());
    assert!(directions.len() >= 2, "a fan needs at least two rays");
    let raster = if lengths.iter().all(|&l| l <= 0.0) {
        vec![(apex[1].round() as isize, apex[0].round() as isize)]
    } else {
        fill_polygon(&fan_vertices(apex, directions, lengths))
    };
    FanPolygon {
        apex,
        directions: directions.to_vec(),
        lengths: lengths.to_vec(),
        raster,
    }
}
