//! Spreading apices with k-means.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A contour point selected as an apex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Apex {
    /// Position along the contour.
    pub index: usize,
    /// `[x, y]` pixel coordinates.
    pub point: [f64; 2],
}

const MAX_ITERS: usize = 50;

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

fn nearest(p: [f64; 2], centers: &[[f64; 2]]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = dist2(p, *c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Lloyd's k-means with k-means++ seeding. Returns the cluster of each point.
pub fn kmeans_assign<R: Rng + ?Sized>(points: &[[f64; 2]], k: usize, rng: &mut R) -> Vec<usize> {
    let n = points.len();
    assert!(k >= 1 && k <= n, "need 1 <= k <= number of points");
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)]);
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| dist2(*p, *c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            0
        };
        centers.push(points[pick]);
    }

    let mut assign = vec![usize::MAX; n];
    for _ in 0..MAX_ITERS {
        let next: Vec<usize> = points.iter().map(|p| nearest(*p, &centers)).collect();
        let changed = next != assign;
        assign = next;
        // recompute centres, re-seeding empty clusters with the worst-fit point
        let mut sums = vec![[0.0f64; 2]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            sums[a][0] += p[0];
            sums[a][1] += p[1];
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                let worst = (0..n)
                    .filter(|&i| counts[assign[i]] > 1)
                    .max_by(|&a, &b| {
                        dist2(points[a], centers[assign[a]])
                            .total_cmp(&dist2(points[b], centers[assign[b]]))
                            .then(b.cmp(&a))
                    })
                    .expect("k <= n leaves a cluster with two or more points");
                counts[assign[worst]] -= 1;
                assign[worst] = j;
                counts[j] = 1;
                centers[j] = points[worst];
            }
        }
        if !changed {
            break;
        }
    }
    assign
}

/// Picks at most `m` spread-out apices: clusters them into `m` groups and
/// keeps, per group, the apex farthest from `centroid` (smaller contour index
/// on ties). Output is sorted by contour index.
pub fn select_apices_kmeans<R: Rng + ?Sized>(
    apices: &[Apex],
    m: usize,
    centroid: [f64; 2],
    rng: &mut R,
) -> Vec<Apex> {
    let m = m.max(1);
    if apices.len() <= m {
        let mut out = apices.to_vec();
        out.sort_by_key(|a| a.index);
        return out;
    }
    let points: Vec<[f64; 2]> = apices.iter().map(|a| a.point).collect();
    let assign = kmeans_assign(&points, m, rng);
    let mut out: Vec<Apex> = (0..m)
        .filter_map(|j| {
            apices
                .iter()
                .zip(&assign)
                .filter(|(_, &c)| c == j)
                .map(|(a, _)| *a)
                .max_by(|a, b| {
                    dist2(a.point, centroid)
                        .total_cmp(&dist2(b.point, centroid))
                        .then(b.index.cmp(&a.index))
                })
        })
        .collect();
    out.sort_by_key(|a| a.index);
    out
}
