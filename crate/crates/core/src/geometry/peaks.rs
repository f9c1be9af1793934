//! Peak picking on periodic signals with prominence and distance filters.

/// Linear-interpolation quantile (`q` in `[0, 1]`) of `values`.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of an empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[inline]
pub fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Local maxima of a periodic signal. Flat tops bordered by strictly lower
/// values count once, at their (left-)middle sample.
pub fn circular_local_maxima(signal: &[f64]) -> Vec<usize> {
    let n = signal.len();
    if n < 3 {
        return Vec::new();
    }
    // Rotate so the sequence starts at a global minimum; no peak straddles it.
    let start = (0..n)
        .min_by(|&a, &b| signal[a].total_cmp(&signal[b]).then(a.cmp(&b)))
        .unwrap();
    let at = |i: usize| signal[(start + i) % n];
    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n {
        if at(i - 1) < at(i) {
            let mut ahead = i + 1;
            while ahead < n && at(ahead) == at(i) {
                ahead += 1;
            }
            // `ahead == n` wraps to the global minimum.
            let next = if ahead < n { at(ahead) } else { at(0) };
            if next < at(i) {
                let mid = (i + ahead - 1) / 2;
                peaks.push((start + mid) % n);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks.sort_unstable();
    peaks
}

/// Topographic prominence of `peak` on a periodic signal: the peak height
/// minus the higher of the two lowest points reached before climbing above
/// the peak on either side.
pub fn circular_prominence(signal: &[f64], peak: usize) -> f64 {
    let n = signal.len();
    let h = signal[peak];
    let mut left_min = h;
    for k in 1..n {
        let v = signal[(peak + n - k) % n];
        if v > h {
            break;
        }
        left_min = left_min.min(v);
    }
    let mut right_min = h;
    for k in 1..n {
        let v = signal[(peak + k) % n];
        if v > h {
            break;
        }
        right_min = right_min.min(v);
    }
    h - left_min.max(right_min)
}

/// Keeps peaks so that every pair is at least `min_distance` apart along the
/// circle. Higher peaks win; equal heights keep the smaller index.
pub fn suppress_by_distance(signal: &[f64], peaks: &[usize], min_distance: usize) -> Vec<usize> {
    let n = signal.len();
    let mut order: Vec<usize> = peaks.to_vec();
    order.sort_by(|&a, &b| signal[b].total_cmp(&signal[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for p in order {
        if kept
            .iter()
            .all(|&k| circular_distance(k, p, n) >= min_distance)
        {
            kept.push(p);
        }
    }
    kept.sort_unstable();
    kept
}

/// Apex indices: local maxima of `kappa_plus`, thinned to pairwise circular
/// distance `>= min_distance`, whose prominence exceeds the `q`-quantile of
/// `kappa_plus`. Sorted ascending.
pub fn detect_apices(kappa_plus: &[f64], q: f64, min_distance: usize) -> Vec<usize> {
    if kappa_plus.len() < 3 {
        return Vec::new();
    }
    let tau = quantile(kappa_plus, q);
    let maxima = circular_local_maxima(kappa_plus);
    suppress_by_distance(kappa_plus, &maxima, min_distance.max(1))
        .into_iter()
        .filter(|&p| circular_prominence(kappa_plus, p) > tau)
        .collect()
}
