//! Segmentation metrics and training objectives.
//!
//! Metrics use hard labels; losses use soft (probability-weighted) counts.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::labelmap::{ClassId, LabelMap};

const C: usize = ClassId::COUNT;

/// Tolerance on per-pixel probability sums.
pub const PROB_SUM_TOL: f64 = 1e-6;

/// Floor of the log argument in the cross-entropy.
pub const LOG_FLOOR: f64 = 1e-7;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Per-pixel class probabilities, pixel-major (`data[(r * width + c) * 5 + class]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProbMap")]
pub struct ProbMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawProbMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl TryFrom<RawProbMap> for ProbMap {
    type Error = MetricsError;

    fn try_from(raw: RawProbMap) -> Result<Self, Self::Error> {
        ProbMap::new(raw.height, raw.width, raw.data)
    }
}

impl ProbMap {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<ProbMap, MetricsError> {
        if data.len() != height * width * C {
            return Err(MetricsError::InvalidProbMap(format!(
                "expected {} values for {height}x{width}x{C}, got {}",
                height * width * C,
                data.len()
            )));
        }
        for (i, px) in data.chunks_exact(C).enumerate() {
            if px.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(MetricsError::InvalidProbMap(format!(
                    "pixel {i} has a negative or non-finite value"
                )));
            }
            let s: f64 = px.iter().sum();
            if (s - 1.0).abs() > PROB_SUM_TOL {
                return Err(MetricsError::InvalidProbMap(format!(
                    "pixel {i} sums to {s}"
                )));
            }
        }
        Ok(ProbMap {
            height,
            width,
            data,
        })
    }

    /// One-hot probabilities of `labels`.
    pub fn one_hot(labels: &LabelMap) -> ProbMap {
        let mut data = vec![0.0; labels.len() * C];
        for (i, c) in labels.classes().iter().enumerate() {
            data[i * C + c.index()] = 1.0;
        }
        ProbMap {
            height: labels.height(),
            width: labels.width(),
            data,
        }
    }

    pub fn uniform(height: usize, width: usize) -> ProbMap {
        ProbMap {
            height,
            width,
            data: vec![1.0 / C as f64; height * width * C],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Probabilities of pixel `i` in row-major order.
    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.data[i * C..(i + 1) * C]
    }

    pub fn argmax(&self) -> LabelMap {
        let classes = self
            .data
            .chunks_exact(C)
            .map(|px| {
                let mut best = 0;
                for c in 1..C {
                    if px[c] > px[best] {
                        best = c;
                    }
                }
                ClassId::ALL[best]
            })
            .collect();
        LabelMap::from_classes(self.width, self.height, classes).expect("sizes agree")
    }

    fn check_shape(&self, truth: &LabelMap) -> Result<(), MetricsError> {
        if self.height != truth.height() || self.width != truth.width() {
            return Err(MetricsError::ShapeMismatch(
                self.height,
                self.width,
                truth.height(),
                truth.width(),
            ));
        }
        Ok(())
    }
}

/// 5x5 contingency table, `matrix[truth][pred]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub matrix: [[u64; C]; C],
}

impl ConfusionCounts {
    pub fn tp(&self, c: ClassId) -> u64 {
        self.matrix[c.index()][c.index()]
    }

    pub fn fp(&self, c: ClassId) -> u64 {
        let j = c.index();
        (0..C).filter(|&i| i != j).map(|i| self.matrix[i][j]).sum()
    }

    pub fn fn_(&self, c: ClassId) -> u64 {
        let i = c.index();
        (0..C).filter(|&j| j != i).map(|j| self.matrix[i][j]).sum()
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        for i in 0..C {
            for j in 0..C {
                self.matrix[i][j] += other.matrix[i][j];
            }
        }
    }
}

fn check_same(pred: &LabelMap, truth: &LabelMap) -> Result<(), MetricsError> {
    if !pred.same_shape(truth) {
        return Err(MetricsError::ShapeMismatch(
            pred.height(),
            pred.width(),
            truth.height(),
            truth.width(),
        ));
    }
    Ok(())
}

pub fn confusion_counts(
    pred: &LabelMap,
    truth: &LabelMap,
) -> Result<ConfusionCounts, MetricsError> {
    check_same(pred, truth)?;
    let mut out = ConfusionCounts::default();
    for (p, t) in pred.classes().iter().zip(truth.classes()) {
        out.matrix[t.index()][p.index()] += 1;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IouReport {
    pub per_class: [f64; C],
    pub miou: f64,
}

/// Per-class IoU and their unweighted mean over all five classes. A class
/// absent from both maps scores 1.
pub fn iou(counts: &ConfusionCounts) -> IouReport {
    let mut per_class = [0.0; C];
    for c in ClassId::ALL {
        let tp = counts.tp(c);
        let denom = tp + counts.fp(c) + counts.fn_(c);
        per_class[c.index()] = if denom == 0 {
            1.0
        } else {
            tp as f64 / denom as f64
        };
    }
    IouReport {
        per_class,
        miou: per_class.iter().sum::<f64>() / C as f64,
    }
}

/// Class-balanced weights from pixel counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CbWeights {
    pub mu: f64,
    /// `(1 - mu) / (1 - mu^n_c)` with absent classes set to the largest
    /// present value.
    pub raw: [f64; C],
    /// `raw` rescaled to mean 1 over present classes.
    pub normalized: [f64; C],
}

/// Effective-number weights `(1 - mu) / (1 - mu^n)` with
/// `mu = (max n - 1) / max n`.
pub fn cb_weights(counts: &[u64; C]) -> Result<CbWeights, MetricsError> {
    let max = *counts.iter().max().unwrap_or(&0);
    if max == 0 {
        return Err(MetricsError::AllEmpty);
    }
    let m = max as f64;
    let mu = (m - 1.0) / m;
    let one_minus_mu = 1.0 / m;
    let ln_mu = (-one_minus_mu).ln_1p();
    let mut raw = [f64::NAN; C];
    for (w, &n) in raw.iter_mut().zip(counts) {
        if n > 0 {
            // 1 - mu^n, accurate for mu close to 1
            let denom = if max == 1 {
                1.0
            } else {
                -(n as f64 * ln_mu).exp_m1()
            };
            *w = one_minus_mu / denom;
        }
    }
    let top = raw
        .iter()
        .copied()
        .filter(|w| !w.is_nan())
        .fold(f64::MIN, f64::max);
    let present = counts.iter().filter(|&&n| n > 0).count() as f64;
    let mean = raw.iter().copied().filter(|w| !w.is_nan()).sum::<f64>() / present;
    for w in raw.iter_mut() {
        if w.is_nan() {
            *w = top;
        }
    }
    let mut normalized = raw;
    normalized.iter_mut().for_each(|w| *w /= mean);
    Ok(CbWeights {
        mu,
        raw,
        normalized,
    })
}

/// Mean of `-w[y] ln(max(p_y, 1e-7))` over pixels.
pub fn cb_cross_entropy(
    prob: &ProbMap,
    truth: &LabelMap,
    weights: &[f64; C],
) -> Result<f64, MetricsError> {
    prob.check_shape(truth)?;
    let sum: CompensatedSum = truth
        .classes()
        .iter()
        .enumerate()
        .map(|(i, y)| -weights[y.index()] * prob.pixel(i)[y.index()].max(LOG_FLOOR).ln())
        .collect();
    Ok(sum.value() / truth.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TverskyParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eps: f64,
}

impl Default for TverskyParams {
    fn default() -> Self {
        TverskyParams {
            alpha: 0.65,
            beta: 0.35,
            gamma: 1.33,
            eps: 1e-6,
        }
    }
}

/// Soft `(TP, FP, FN)` of class `c`.
pub fn soft_counts(prob: &ProbMap, truth: &LabelMap, c: ClassId) -> (f64, f64, f64) {
    let (mut tp, mut fp, mut fn_) = (
        CompensatedSum::default(),
        CompensatedSum::default(),
        CompensatedSum::default(),
    );
    for (i, y) in truth.classes().iter().enumerate() {
        let p = prob.pixel(i)[c.index()];
        if *y == c {
            tp.add(p);
            fn_.add(1.0 - p);
        } else {
            fp.add(p);
        }
    }
    (tp.value(), fp.value(), fn_.value())
}

/// Mean of `(1 - T_c)^gamma` over the foreground classes (1..=4) present in
/// `truth`, with `T_c = TP / (TP + alpha FP + beta FN + eps)` on soft counts.
/// Zero when no foreground class is present.
pub fn focal_tversky(
    prob: &ProbMap,
    truth: &LabelMap,
    params: &TverskyParams,
) -> Result<f64, MetricsError> {
    prob.check_shape(truth)?;
    let hist = crate::labelmap::class_histogram(truth);
    let mut total = CompensatedSum::default();
    let mut n = 0usize;
    for c in ClassId::ALL.into_iter().skip(1) {
        if hist[c.index()] == 0 {
            continue;
        }
        let (tp, fp, fn_) = soft_counts(prob, truth, c);
        let t = tp / (tp + params.alpha * fp + params.beta * fn_ + params.eps);
        total.add((1.0 - t).max(0.0).powf(params.gamma));
        n += 1;
    }
    Ok(if n == 0 {
        0.0
    } else {
        total.value() / n as f64
    })
}

/// Mean of `p_b^gamma_p` over pixels whose true class is `a`; zero when there
/// are none.
pub fn confusion_penalty(
    prob: &ProbMap,
    truth: &LabelMap,
    a: ClassId,
    b: ClassId,
    gamma_p: f64,
) -> Result<f64, MetricsError> {
    prob.check_shape(truth)?;
    let mut sum = CompensatedSum::default();
    let mut n = 0usize;
    for (i, y) in truth.classes().iter().enumerate() {
        if *y == a {
            sum.add(prob.pixel(i)[b.index()].powf(gamma_p));
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { sum.value() / n as f64 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionPair {
    pub from: ClassId,
    pub to: ClassId,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossWeights {
    pub lambda_ce: f64,
    pub lambda_ftl: f64,
    pub pairs: Vec<ConfusionPair>,
    #[serde(default)]
    pub tversky: TverskyParams,
    #[serde(default = "default_gamma_p")]
    pub gamma_p: f64,
    /// Fixed class weights for the cross-entropy; derived from the truth
    /// counts when absent.
    #[serde(default)]
    pub class_weights: Option<[f64; C]>,
}

fn default_gamma_p() -> f64 {
    2.0
}

impl Default for LossWeights {
    /// `(lambda_ce, lambda_ftl) = (0.3, 0.7)`, penalties look-alike -> oil
    /// (0.40) and sea -> look-alike (0.30).
    fn default() -> Self {
        LossWeights {
            lambda_ce: 0.3,
            lambda_ftl: 0.7,
            pairs: vec![
                ConfusionPair {
                    from: ClassId::LookAlike,
                    to: ClassId::Oil,
                    lambda: 0.40,
                },
                ConfusionPair {
                    from: ClassId::Sea,
                    to: ClassId::LookAlike,
                    lambda: 0.30,
                },
            ],
            tversky: TverskyParams::default(),
            gamma_p: 2.0,
            class_weights: None,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let bad = |what: &str| {
            Err(MetricsError::InvalidProbMap(format!(
                "invalid loss weights: {what}"
            )))
        };
        let lambdas = [self.lambda_ce, self.lambda_ftl]
            .into_iter()
            .chain(self.pairs.iter().map(|p| p.lambda));
        if lambdas.into_iter().any(|l| !(l >= 0.0 && l.is_finite())) {
            return bad("weights must be finite and >= 0");
        }
        if self.pairs.iter().any(|p| p.from == p.to) {
            return bad("a confusion pair needs two different classes");
        }
        let t = &self.tversky;
        if !(t.alpha >= 0.0 && t.beta >= 0.0 && t.gamma > 0.0 && t.eps >= 0.0) {
            return bad("tversky needs alpha, beta, eps >= 0 and gamma > 0");
        }
        if !(self.gamma_p > 0.0) {
            return bad("gamma_p must be > 0");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTerm {
    pub from: ClassId,
    pub to: ClassId,
    pub value: f64,
}

/// Unweighted terms and their weighted total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub cb_ce: f64,
    pub focal_tversky: f64,
    pub penalties: Vec<PenaltyTerm>,
    pub class_weights: [f64; C],
    pub total: f64,
}

pub fn composite_loss(
    prob: &ProbMap,
    truth: &LabelMap,
    weights: &LossWeights,
) -> Result<LossBreakdown, MetricsError> {
    weights.validate()?;
    prob.check_shape(truth)?;
    let w = match weights.class_weights {
        Some(w) => w,
        None => cb_weights(&crate::labelmap::class_histogram(truth))?.normalized,
    };
    let ce = cb_cross_entropy(prob, truth, &w)?;
    let ftl = focal_tversky(prob, truth, &weights.tversky)?;
    let mut total = weights.lambda_ce * ce + weights.lambda_ftl * ftl;
    let mut penalties = Vec::with_capacity(weights.pairs.len());
    for p in &weights.pairs {
        let value = confusion_penalty(prob, truth, p.from, p.to, weights.gamma_p)?;
        total += p.lambda * value;
        penalties.push(PenaltyTerm {
            from: p.from,
            to: p.to,
            value,
        });
    }
    Ok(LossBreakdown {
        cb_ce: ce,
        focal_tversky: ftl,
        penalties,
        class_weights: w,
        total,
    })
}

/// Interpretation of the synthetic-loss weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthScale {
    /// Used as given.
    #[default]
    Raw,
    /// Divided by 100.
    Percent,
}

/// `real + lambda * synth` with `lambda` scaled per `scale`.
pub fn total_loss(real: f64, synth: f64, lambda_synth: f64, scale: SynthScale) -> f64 {
    let lambda = match scale {
        SynthScale::Raw => lambda_synth,
        SynthScale::Percent => lambda_synth / 100.0,
    };
    real + lambda * synth
}

/// Per-scene areas and IoU.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneStats {
    pub iou: IouReport,
    pub predicted_km2: [f64; C],
    pub false_positive_km2: [f64; C],
}

pub fn scene_area_stats(
    pred: &LabelMap,
    truth: &LabelMap,
    pixel_area_m2: f64,
) -> Result<SceneStats, MetricsError> {
    let counts = confusion_counts(pred, truth)?;
    let km2 = |n: u64| n as f64 * pixel_area_m2 / 1e6;
    let mut predicted_km2 = [0.0; C];
    let mut false_positive_km2 = [0.0; C];
    for c in ClassId::ALL {
        let col: u64 = (0..C).map(|t| counts.matrix[t][c.index()]).sum();
        predicted_km2[c.index()] = km2(col);
        false_positive_km2[c.index()] = km2(counts.fp(c));
    }
    Ok(SceneStats {
        iou: iou(&counts),
        predicted_km2,
        false_positive_km2,
    })
}

/// Tab-separated report rows.
pub mod report {
    use super::SceneStats;

    pub fn header() -> String {
        [
            "name",
            "mIoU",
            "Sea",
            "Oil",
            "Look-alike",
            "Ship",
            "Land",
            "Oil_pred_km2",
            "Oil_FP_km2",
            "Look-alike_pred_km2",
            "Look-alike_FP_km2",
        ]
        .join("\t")
    }

    /// IoU values in percent with two decimals, areas in km² with four.
    pub fn row(name: &str, s: &SceneStats) -> String {
        let mut cols = vec![name.to_string(), format!("{:.2}", 100.0 * s.iou.miou)];
        cols.extend(s.iou.per_class.iter().map(|v| format!("{:.2}", 100.0 * v)));
        for c in [1, 2] {
            cols.push(format!("{:.4}", s.predicted_km2[c]));
            cols.push(format!("{:.4}", s.false_positive_km2[c]));
        }
        cols.join("\t")
    }
}
