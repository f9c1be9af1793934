//! Batch generation under the edit regimes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{augment, AugmentedMask, Stages};
use crate::config::MorpConfig;
use crate::error::EngineError;
use crate::labelmap::LabelMap;
use crate::rng::{self, tag};

/// How much of a mask set is geometrically edited.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Masks pass through unchanged.
    NoMove,
    /// Placement only.
    M00,
    /// Full perturbation on half of the masks, placement only on the rest.
    M50,
    /// Full perturbation on every mask.
    M100,
}

impl FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nomove" => Ok(Regime::NoMove),
            "m00" => Ok(Regime::M00),
            "m50" => Ok(Regime::M50),
            "m100" => Ok(Regime::M100),
            _ => Err(format!(
                "unknown regime `{s}` (expected nomove, m00, m50 or m100)"
            )),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::NoMove => "nomove",
            Regime::M00 => "m00",
            Regime::M50 => "m50",
            Regime::M100 => "m100",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    Identity,
    PlacementOnly,
    Full,
}

/// One output of a batch: replicate `replicate` of input `mask`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Job {
    pub mask: usize,
    pub replicate: usize,
    pub seed: u64,
    pub kind: JobKind,
}

/// Indices of the `ceil(n / 2)` masks that receive the full perturbation in
/// the `m50` regime, ascending.
pub fn half_selection(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, &[tag::REGIME]));
    idx.truncate(n.div_ceil(2));
    idx.sort_unstable();
    idx
}

/// Jobs for `n_masks` inputs, ordered by mask then replicate. Each job seed is
/// derived from `(seed, mask, replicate)` only.
pub fn plan_batch(
    n_masks: usize,
    regime: Regime,
    multiplier: usize,
    seed: u64,
) -> Result<Vec<Job>, EngineError> {
    if n_masks == 0 {
        return Err(EngineError::NoMasks);
    }
    if multiplier == 0 {
        return Err(crate::error::ConfigError::invalid("multiplier", "must be >= 1").into());
    }
    let mut full = vec![false; n_masks];
    match regime {
        Regime::M100 => full.iter_mut().for_each(|f| *f = true),
        Regime::M50 => half_selection(n_masks, seed)
            .into_iter()
            .for_each(|i| full[i] = true),
        Regime::NoMove | Regime::M00 => {}
    }
    let mut jobs = Vec::with_capacity(n_masks * multiplier);
    for (mask, &is_full) in full.iter().enumerate() {
        for replicate in 0..multiplier {
            let kind = match regime {
                Regime::NoMove => JobKind::Identity,
                _ if is_full => JobKind::Full,
                _ => JobKind::PlacementOnly,
            };
            jobs.push(Job {
                mask,
                replicate,
                seed: rng::derive_seed(seed, &[mask as u64, replicate as u64]),
                kind,
            });
        }
    }
    Ok(jobs)
}

pub fn run_job(mask: &LabelMap, job: &Job, cfg: &MorpConfig) -> AugmentedMask {
    let mut cfg = cfg.clone();
    cfg.seed = job.seed;
    match job.kind {
        JobKind::Identity => AugmentedMask {
            result: mask.clone(),
            records: Vec::new(),
            seed: job.seed,
        },
        JobKind::PlacementOnly => augment(mask, &cfg, Stages::PlacementOnly),
        JobKind::Full => augment(mask, &cfg, Stages::Full),
    }
}

/// Fails with the first pair of bit-identical outputs.
pub fn check_unique<'a>(
    outputs: impl IntoIterator<Item = &'a LabelMap>,
) -> Result<(), EngineError> {
    let mut seen: HashMap<&LabelMap, usize> = HashMap::new();
    for (i, m) in outputs.into_iter().enumerate() {
        if let Some(&first) = seen.get(m) {
            return Err(EngineError::DuplicateOutput { first, second: i });
        }
        seen.insert(m, i);
    }
    Ok(())
}

/// Runs every job sequentially. With `multiplier > 1` all outputs must be
/// pairwise distinct.
pub fn batch_generate(
    masks: &[LabelMap],
    regime: Regime,
    multiplier: usize,
    cfg: &MorpConfig,
) -> Result<Vec<AugmentedMask>, EngineError> {
    let jobs = plan_batch(masks.len(), regime, multiplier, cfg.seed)?;
    let out: Vec<AugmentedMask> = jobs
        .iter()
        .map(|j| run_job(&masks[j.mask], j, cfg))
        .collect();
    if multiplier > 1 {
        check_unique(out.iter().map(|a| &a.result))?;
    }
    Ok(out)
}
