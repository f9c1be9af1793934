//! Scene preparation: speckle filtering, percentile normalization, patch
//! extraction, multi-scale windows, hard-negative mining and scene manifests.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::PatchError;
use crate::geometry::{distance_transform, BinaryGrid};
use crate::labelmap::{ClassId, LabelMap};
use crate::rng::{self, tag};

/// Intensity grid with its label map.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub id: String,
    width: usize,
    height: usize,
    intensity: Vec<f64>,
    labels: LabelMap,
    /// Metres per pixel.
    pub pixel_spacing: f64,
}

impl Scene {
    pub fn new(
        id: impl Into<String>,
        intensity: Vec<f64>,
        labels: LabelMap,
        pixel_spacing: f64,
    ) -> Result<Scene, PatchError> {
        let (w, h) = (labels.width(), labels.height());
        if intensity.len() != w * h {
            return Err(PatchError::ShapeMismatch(intensity.len(), 1, h, w));
        }
        if let Some(i) = intensity.iter().position(|v| !v.is_finite()) {
            return Err(PatchError::InvalidScene(format!(
                "non-finite intensity at pixel {i}"
            )));
        }
        if !(pixel_spacing > 0.0) {
            return Err(PatchError::InvalidScene(
                "pixel spacing must be positive".into(),
            ));
        }
        Ok(Scene {
            id: id.into(),
            width: w,
            height: h,
            intensity,
            labels,
            pixel_spacing,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn labels(&self) -> &LabelMap {
        &self.labels
    }

    /// Median filter followed by percentile normalization.
    pub fn prepared(
        &self,
        lo: f64,
        hi: f64,
        method: PercentileMethod,
    ) -> Result<Scene, PatchError> {
        let filtered = median_filter_3x3(&self.intensity, self.width, self.height)?;
        let intensity = percentile_normalize(&filtered, lo, hi, method)?;
        Ok(Scene {
            intensity,
            ..self.clone()
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PercentileMethod {
    /// Value at rank `ceil(p / 100 * n)` of the sorted data.
    #[default]
    NearestRank,
    /// Linear interpolation between closest ranks.
    Linear,
}

/// `p`-th percentile (0..=100) of finite `values`.
pub fn percentile(sorted: &[f64], p: f64, method: PercentileMethod) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of an empty set");
    match method {
        PercentileMethod::NearestRank => {
            let rank = (p / 100.0 * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
            sorted[rank - 1]
        }
        PercentileMethod::Linear => {
            let h = p / 100.0 * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Clips to the `[lo, hi]` percentile range of the scene and rescales to
/// `[0, 1]`.
pub fn percentile_normalize(
    values: &[f64],
    lo: f64,
    hi: f64,
    method: PercentileMethod,
) -> Result<Vec<f64>, PatchError> {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if sorted.is_empty() {
        return Err(PatchError::DegenerateScene);
    }
    sorted.sort_by(f64::total_cmp);
    let p_lo = percentile(&sorted, lo, method);
    let p_hi = percentile(&sorted, hi, method);
    if !(p_hi > p_lo) {
        return Err(PatchError::DegenerateScene);
    }
    Ok(values
        .iter()
        .map(|v| (v.clamp(p_lo, p_hi) - p_lo) / (p_hi - p_lo))
        .collect())
}

/// 3x3 median with edge-including reflection (`-1 -> 0`, `n -> n - 1`).
pub fn median_filter_3x3(
    values: &[f64],
    width: usize,
    height: usize,
) -> Result<Vec<f64>, PatchError> {
    if width < 3 || height < 3 {
        return Err(PatchError::TooSmall(height, width));
    }
    assert_eq!(values.len(), width * height);
    let reflect = |i: isize, n: usize| -> usize {
        if i < 0 {
            (-i - 1) as usize
        } else if i as usize >= n {
            2 * n - 1 - i as usize
        } else {
            i as usize
        }
    };
    let mut out = vec![0.0; values.len()];
    let mut win = [0.0f64; 9];
    for r in 0..height {
        for c in 0..width {
            let mut k = 0;
            for dr in -1..=1 {
                let rr = reflect(r as isize + dr, height);
                for dc in -1..=1 {
                    win[k] = values[rr * width + reflect(c as isize + dc, width)];
                    k += 1;
                }
            }
            win.sort_by(f64::total_cmp);
            out[r * width + c] = win[4];
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatchKind {
    Positive,
    Background,
    Multiscale,
    HardNegative,
}

impl fmt::Display for PatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PatchKind::Positive => "positive",
            PatchKind::Background => "background",
            PatchKind::Multiscale => "multiscale",
            PatchKind::HardNegative => "hard-negative",
        })
    }
}

/// Window position in scene coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PatchOrigin {
    pub row: usize,
    pub col: usize,
    /// Side of the square source window.
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub origin: PatchOrigin,
    pub kind: PatchKind,
    /// Row-major, `labels.width()` squared values.
    pub intensity: Vec<f64>,
    pub labels: LabelMap,
}

/// Summed-area table of a per-pixel predicate.
struct Prefix {
    width: usize,
    sums: Vec<u64>,
}

impl Prefix {
    fn new(width: usize, height: usize, f: impl Fn(usize) -> bool) -> Prefix {
        let w1 = width + 1;
        let mut sums = vec![0u64; w1 * (height + 1)];
        for r in 0..height {
            let mut row = 0u64;
            for c in 0..width {
                row += f(r * width + c) as u64;
                sums[(r + 1) * w1 + c + 1] = sums[r * w1 + c + 1] + row;
            }
        }
        Prefix { width, sums }
    }

    fn window(&self, row: usize, col: usize, size: usize) -> u64 {
        let w1 = self.width + 1;
        let (r1, c1) = (row + size, col + size);
        self.sums[r1 * w1 + c1] + self.sums[row * w1 + col]
            - self.sums[row * w1 + c1]
            - self.sums[r1 * w1 + col]
    }
}

/// Window starts `0, stride, 2 stride, ...` plus a final start flush with the
/// far edge when the stride does not land on it.
pub fn window_starts(len: usize, window: usize, stride: usize) -> Vec<usize> {
    assert!(stride >= 1 && window <= len);
    let last = len - window;
    let mut v: Vec<usize> = (0..=last).step_by(stride).collect();
    if v.last() != Some(&last) {
        v.push(last);
    }
    v
}

fn sliding_origins(
    width: usize,
    height: usize,
    window: usize,
    stride: usize,
) -> Result<Vec<PatchOrigin>, PatchError> {
    if width < window || height < window {
        return Err(PatchError::SceneTooSmall {
            height,
            width,
            window,
        });
    }
    let cols = window_starts(width, window, stride);
    Ok(window_starts(height, window, stride)
        .into_iter()
        .flat_map(|row| {
            cols.iter().map(move |&col| PatchOrigin {
                row,
                col,
                size: window,
            })
        })
        .collect())
}

fn is_spill(c: ClassId) -> bool {
    matches!(c, ClassId::Oil | ClassId::LookAlike)
}

fn crop(scene: &Scene, o: PatchOrigin, kind: PatchKind) -> Patch {
    let mut intensity = Vec::with_capacity(o.size * o.size);
    let mut labels = Vec::with_capacity(o.size * o.size);
    for r in o.row..o.row + o.size {
        let base = r * scene.width;
        intensity.extend_from_slice(&scene.intensity[base + o.col..base + o.col + o.size]);
        labels.extend_from_slice(&scene.labels.classes()[base + o.col..base + o.col + o.size]);
    }
    Patch {
        origin: o,
        kind,
        intensity,
        labels: LabelMap::from_classes(o.size, o.size, labels).expect("square crop"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlidingParams {
    pub window: usize,
    pub stride: usize,
    /// Background patches per positive patch.
    pub neg_pos_ratio: f64,
}

impl Default for SlidingParams {
    fn default() -> Self {
        SlidingParams {
            window: 512,
            stride: 256,
            neg_pos_ratio: 1.25,
        }
    }
}

/// Origins of positive windows (any oil or look-alike pixel) and of the
/// sampled background windows, each sorted.
pub fn plan_patches(
    scene: &Scene,
    params: &SlidingParams,
    seed: u64,
) -> Result<(Vec<PatchOrigin>, Vec<PatchOrigin>), PatchError> {
    if params.stride == 0 {
        return Err(PatchError::InvalidScene("stride must be >= 1".into()));
    }
    let origins = sliding_origins(scene.width, scene.height, params.window, params.stride)?;
    let labels = scene.labels.classes();
    let spill = Prefix::new(scene.width, scene.height, |i| is_spill(labels[i]));
    let (pos, mut neg): (Vec<PatchOrigin>, Vec<PatchOrigin>) = origins
        .into_iter()
        .partition(|o| spill.window(o.row, o.col, o.size) > 0);
    let want = (params.neg_pos_ratio * pos.len() as f64).round() as usize;
    let mut rng = rng::stream(seed, &[tag::PATCHES]);
    neg.shuffle(&mut rng);
    neg.truncate(want);
    neg.sort();
    Ok((pos, neg))
}

/// Sliding-window patches: every position touching oil or look-alike, plus
/// `round(ratio * positives)` background positions drawn without replacement
/// (fewer if the scene runs out).
pub fn extract_patches(
    scene: &Scene,
    params: &SlidingParams,
    seed: u64,
) -> Result<Vec<Patch>, PatchError> {
    let (pos, neg) = plan_patches(scene, params, seed)?;
    Ok(pos
        .into_iter()
        .map(|o| crop(scene, o, PatchKind::Positive))
        .chain(
            neg.into_iter()
                .map(|o| crop(scene, o, PatchKind::Background)),
        )
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiscaleParams {
    pub min_side: usize,
    pub max_side: usize,
    pub out_size: usize,
    /// Window centres lie within this distance of an annotated pixel.
    pub margin: f64,
    pub count: usize,
}

impl Default for MultiscaleParams {
    fn default() -> Self {
        MultiscaleParams {
            min_side: 1024,
            max_side: 2048,
            out_size: 512,
            margin: 64.0,
            count: 4,
        }
    }
}

/// Source index and weight pairs for area-averaging `side` samples down to
/// `out` samples.
fn area_weights(side: usize, out: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = side as f64 / out as f64;
    (0..out)
        .map(|i| {
            let a = i as f64 * scale;
            let b = (i + 1) as f64 * scale;
            let mut w = Vec::new();
            let mut k = a.floor() as usize;
            while (k as f64) < b && k < side {
                let overlap = (b.min((k + 1) as f64) - a.max(k as f64)).max(0.0);
                if overlap > 0.0 {
                    w.push((k, overlap / scale));
                }
                k += 1;
            }
            w
        })
        .collect()
}

/// Nearest source index of output sample `i`: `floor((i + 0.5) * side / out)`.
pub fn nearest_index(i: usize, side: usize, out: usize) -> usize {
    (((2 * i + 1) * side) / (2 * out)).min(side - 1)
}

/// Resamples a square window: intensity by area averaging, labels by nearest
/// neighbour.
pub fn resize_window(scene: &Scene, o: PatchOrigin, out: usize, kind: PatchKind) -> Patch {
    let weights = area_weights(o.size, out);
    let mut intensity = vec![0.0; out * out];
    // horizontal pass over the needed rows, then vertical
    let mut rows = vec![0.0; o.size * out];
    for r in 0..o.size {
        let base = (o.row + r) * scene.width + o.col;
        for (j, wj) in weights.iter().enumerate() {
            rows[r * out + j] = wj.iter().map(|&(k, w)| w * scene.intensity[base + k]).sum();
        }
    }
    for (i, wi) in weights.iter().enumerate() {
        for j in 0..out {
            intensity[i * out + j] = wi.iter().map(|&(k, w)| w * rows[k * out + j]).sum();
        }
    }
    let mut labels = Vec::with_capacity(out * out);
    for i in 0..out {
        let sr = o.row + nearest_index(i, o.size, out);
        for j in 0..out {
            let sc = o.col + nearest_index(j, o.size, out);
            labels.push(scene.labels.get(sr, sc));
        }
    }
    Patch {
        origin: o,
        kind,
        intensity,
        labels: LabelMap::from_classes(out, out, labels).expect("square output"),
    }
}

/// Randomly sized windows centred near annotated (oil or look-alike) pixels,
/// resized to `out_size`. Empty when the scene has no annotation.
pub fn multiscale_patches(
    scene: &Scene,
    params: &MultiscaleParams,
    seed: u64,
) -> Result<Vec<Patch>, PatchError> {
    let short = scene.width.min(scene.height);
    if short < params.min_side || params.min_side == 0 || params.min_side > params.max_side {
        return Err(PatchError::SceneTooSmall {
            height: scene.height,
            width: scene.width,
            window: params.min_side,
        });
    }
    let labels = scene.labels.classes();
    let mut grid = BinaryGrid::new(scene.width, scene.height);
    let mut any = false;
    for (i, c) in labels.iter().enumerate() {
        if is_spill(*c) {
            grid.cells[i] = true;
            any = true;
        }
    }
    if !any || params.count == 0 {
        return Ok(Vec::new());
    }
    let field = distance_transform(&grid).map_err(|e| PatchError::InvalidScene(e.to_string()))?;
    let centres: Vec<usize> = (0..labels.len())
        .filter(|&i| field.values[i] <= params.margin)
        .collect();
    let max_side = params.max_side.min(short);
    let mut rng = rng::stream(seed, &[tag::MULTISCALE]);
    let mut out = Vec::with_capacity(params.count);
    for _ in 0..params.count {
        let side = rng.random_range(params.min_side..=max_side);
        let &centre = centres.choose(&mut rng).expect("non-empty");
        let (cr, cc) = (centre / scene.width, centre % scene.width);
        let row = cr.saturating_sub(side / 2).min(scene.height - side);
        let col = cc.saturating_sub(side / 2).min(scene.width - side);
        out.push(resize_window(
            scene,
            PatchOrigin {
                row,
                col,
                size: side,
            },
            params.out_size,
            PatchKind::Multiscale,
        ));
    }
    Ok(out)
}

/// Thresholds of [`hard_negative_filter`], as integer fractions of the window
/// area.
pub const HARD_NEG_FP_PER_MILLE: u64 = 5;
pub const HARD_NEG_SEA_PER_TEN: u64 = 8;

/// Windows where predicted oil or look-alike over true sea covers at least
/// 0.5% of the window and true sea covers at least 80% of it.
pub fn hard_negative_filter(
    pred: &LabelMap,
    truth: &LabelMap,
    window: usize,
    stride: usize,
) -> Result<Vec<PatchOrigin>, PatchError> {
    if !pred.same_shape(truth) {
        return Err(PatchError::ShapeMismatch(
            pred.height(),
            pred.width(),
            truth.height(),
            truth.width(),
        ));
    }
    if stride == 0 {
        return Err(PatchError::InvalidScene("stride must be >= 1".into()));
    }
    let (w, h) = (truth.width(), truth.height());
    let origins = sliding_origins(w, h, window, stride)?;
    let (p, t) = (pred.classes(), truth.classes());
    let fp = Prefix::new(w, h, |i| is_spill(p[i]) && t[i] == ClassId::Sea);
    let sea = Prefix::new(w, h, |i| t[i] == ClassId::Sea);
    let area = (window * window) as u64;
    Ok(origins
        .into_iter()
        .filter(|o| {
            fp.window(o.row, o.col, o.size) * 1000 >= HARD_NEG_FP_PER_MILLE * area
                && sea.window(o.row, o.col, o.size) * 10 >= HARD_NEG_SEA_PER_TEN * area
        })
        .collect())
}

/// Crops of the windows selected by [`hard_negative_filter`], using `pred`
/// as the model output over `scene`.
pub fn hard_negative_patches(
    scene: &Scene,
    pred: &LabelMap,
    window: usize,
    stride: usize,
) -> Result<Vec<Patch>, PatchError> {
    Ok(hard_negative_filter(pred, &scene.labels, window, stride)?
        .into_iter()
        .map(|o| crop(scene, o, PatchKind::HardNegative))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// One scene of a manifest.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifestRow {
    pub img: String,
    pub spill_date: NaiveDate,
    pub lat: f64,
    pub lon: f64,
    pub acq_date: NaiveDate,
    pub delta_days: i64,
    pub patches: u32,
    pub split: Split,
}

pub const MANIFEST_COLUMNS: [&str; 8] = [
    "Img",
    "SpillDate",
    "Lat",
    "Lon",
    "AcqDate",
    "DeltaDays",
    "Patches",
    "Split",
];

/// Scene-to-split assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
    index: HashMap<String, usize>,
}

impl Manifest {
    pub fn split_of(&self, img: &str) -> Option<Split> {
        self.index.get(img).map(|&i| self.rows[i].split)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%d/%m/%Y").map_err(|e| format!("bad date `{s}`: {e}"))
}

/// Parses a comma-separated manifest with a header of [`MANIFEST_COLUMNS`].
/// Dates are `dd/mm/yyyy` and the day delta must match them. Rows are
/// numbered from 1 after the header.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestRow>, PatchError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| PatchError::ManifestParse {
            row: 0,
            reason: e.to_string(),
        })?
        .clone();
    if header.iter().ne(MANIFEST_COLUMNS.iter().copied()) {
        return Err(PatchError::ManifestParse {
            row: 0,
            reason: format!("expected header {}", MANIFEST_COLUMNS.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let err = |reason: String| PatchError::ManifestParse { row, reason };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let num = |k: usize| -> Result<f64, PatchError> {
            rec[k]
                .parse::<f64>()
                .map_err(|e| err(format!("{}: {e}", MANIFEST_COLUMNS[k])))
        };
        let spill_date = parse_date(&rec[1]).map_err(err)?;
        let acq_date = parse_date(&rec[4]).map_err(err)?;
        let delta_days: i64 = rec[5].parse().map_err(|e| err(format!("DeltaDays: {e}")))?;
        if (acq_date - spill_date).num_days() != delta_days {
            return Err(err(format!(
                "DeltaDays {delta_days} disagrees with the dates ({} days)",
                (acq_date - spill_date).num_days()
            )));
        }
        if rec[0].is_empty() {
            return Err(err("empty Img".into()));
        }
        rows.push(ManifestRow {
            img: rec[0].to_string(),
            spill_date,
            lat: num(2)?,
            lon: num(3)?,
            acq_date,
            delta_days,
            patches: rec[6].parse().map_err(|e| err(format!("Patches: {e}")))?,
            split: rec[7].parse().map_err(err)?,
        });
    }
    Ok(rows)
}

/// Builds the scene-to-split index. A scene listed under both splits is a
/// leak; listed twice under one split, a parse error.
pub fn split_manifest(rows: Vec<ManifestRow>) -> Result<Manifest, PatchError> {
    let mut index = HashMap::new();
    for (i, r) in rows.iter().enumerate() {
        if let Some(&j) = index.get(&r.img) {
            let prev: &ManifestRow = &rows[j];
            return Err(if prev.split != r.split {
                PatchError::SplitLeakage(r.img.clone())
            } else {
                PatchError::ManifestParse {
                    row: i + 1,
                    reason: format!("scene {} listed twice", r.img),
                }
            });
        }
        index.insert(r.img.clone(), i);
    }
    Ok(Manifest { rows, index })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene_from(labels: LabelMap) -> Scene {
        let n = labels.len();
        Scene::new("s", (0..n).map(|i| i as f64).collect(), labels, 10.0).unwrap()
    }

    #[test]
    fn ramp_percentiles() {
        let v: Vec<f64> = (0..=1000).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.5, PercentileMethod::NearestRank), 5.0);
        assert_eq!(percentile(&v, 97.5, PercentileMethod::NearestRank), 975.0);
        let out = percentile_normalize(&v, 0.5, 97.5, PercentileMethod::NearestRank).unwrap();
        assert_eq!(out.iter().cloned().fold(f64::MAX, f64::min), 0.0);
        assert_eq!(out.iter().cloned().fold(f64::MIN, f64::max), 1.0);
        assert_eq!(percentile(&v, 50.0, PercentileMethod::Linear), 500.0);
    }

    #[test]
    fn constant_is_degenerate() {
        assert!(matches!(
            percentile_normalize(&[3.0; 20], 0.5, 97.5, PercentileMethod::NearestRank),
            Err(PatchError::DegenerateScene)
        ));
    }

    #[test]
    fn median_removes_impulse() {
        let mut v = vec![2.0; 25];
        v[12] = 100.0;
        assert_eq!(median_filter_3x3(&v, 5, 5).unwrap(), vec![2.0; 25]);
        assert!(matches!(
            median_filter_3x3(&v[..10], 5, 2),
            Err(PatchError::TooSmall(2, 5))
        ));
    }

    #[test]
    fn starts_cover_edges() {
        assert_eq!(window_starts(10, 4, 3), vec![0, 3, 6]);
        assert_eq!(window_starts(10, 4, 4), vec![0, 4, 6]);
        assert_eq!(window_starts(4, 4, 2), vec![0]);
    }

    #[test]
    fn ratio_four_to_five() {
        // 4 x 4 grid of windows of size 8 (stride 8), 32 x 32 scene;
        // oil in 4 windows along the top row.
        let mut m = LabelMap::filled(32, 32, ClassId::Sea);
        for c in [1, 9, 17, 25] {
            m.set(2, c, ClassId::Oil);
        }
        let s = scene_from(m);
        let p = SlidingParams {
            window: 8,
            stride: 8,
            neg_pos_ratio: 1.25,
        };
        let patches = extract_patches(&s, &p, 3).unwrap();
        let pos = patches
            .iter()
            .filter(|p| p.kind == PatchKind::Positive)
            .count();
        let neg = patches
            .iter()
            .filter(|p| p.kind == PatchKind::Background)
            .count();
        assert_eq!((pos, neg), (4, 5));
        for p in &patches {
            let spill = p.labels.classes().iter().any(|c| is_spill(*c));
            assert_eq!(spill, p.kind == PatchKind::Positive);
        }
        assert_eq!(extract_patches(&s, &p, 3).unwrap(), patches);
    }

    #[test]
    fn no_spill_no_patches() {
        let s = scene_from(LabelMap::filled(16, 16, ClassId::Sea));
        let p = SlidingParams {
            window: 8,
            stride: 4,
            neg_pos_ratio: 1.25,
        };
        assert!(extract_patches(&s, &p, 1).unwrap().is_empty());
    }

    #[test]
    fn too_small_scene() {
        let s = scene_from(LabelMap::filled(6, 6, ClassId::Sea));
        assert!(matches!(
            extract_patches(&s, &SlidingParams::default(), 1),
            Err(PatchError::SceneTooSmall { .. })
        ));
    }

    #[test]
    fn area_weights_sum_to_one() {
        for (side, out) in [(1024, 512), (1500, 512), (7, 3)] {
            for w in area_weights(side, out) {
                let s: f64 = w.iter().map(|x| x.1).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hard_negative_thresholds() {
        // 20 x 20 window: area 400, 0.5% = 2 pixels, 80% = 320 pixels
        let truth = LabelMap::filled(20, 20, ClassId::Sea);
        let mut pred = truth.clone();
        assert!(hard_negative_filter(&pred, &truth, 20, 20)
            .unwrap()
            .is_empty());
        pred.set(0, 0, ClassId::Oil);
        assert!(hard_negative_filter(&pred, &truth, 20, 20)
            .unwrap()
            .is_empty());
        pred.set(0, 1, ClassId::LookAlike);
        assert_eq!(
            hard_negative_filter(&pred, &truth, 20, 20).unwrap().len(),
            1
        );
    }

    #[test]
    fn manifest_split_rules() {
        let text = "Img,SpillDate,Lat,Lon,AcqDate,DeltaDays,Patches,Split\n\
                    1,22/09/2014,-80.7519,-3.5860,11/10/2014,19,38,Train\n\
                    14,19/11/2018,-79.0288,-8.1117,29/11/2018,10,58,Test\n";
        let m = split_manifest(parse_manifest(text).unwrap()).unwrap();
        assert_eq!(m.split_of("1"), Some(Split::Train));
        assert_eq!(m.split_of("14"), Some(Split::Test));
        let leak = format!("{text}1,22/09/2014,-80.7519,-3.5860,11/10/2014,19,38,Test\n");
        assert!(matches!(
            split_manifest(parse_manifest(&leak).unwrap()),
            Err(PatchError::SplitLeakage(id)) if id == "1"
        ));
        let bad_delta = text.replace(",19,38,", ",18,38,");
        assert!(matches!(
            parse_manifest(&bad_delta),
            Err(PatchError::ManifestParse { row: 1, .. })
        ));
    }
}
