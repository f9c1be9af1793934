use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use morp::metrics::{confusion_counts, iou, report, scene_area_stats, ConfusionCounts, SceneStats};
use morp::MaskFormat;
use rayon::prelude::*;

use crate::config::{MetricsSection, RunConfigFile};
use crate::error::{CliError, Completion};
use crate::{fsutil, Context};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of predicted masks.
    #[arg(long)]
    pub pred: PathBuf,
    /// Directory of ground-truth masks with the same file names.
    #[arg(long)]
    pub truth: PathBuf,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metres per pixel.
    #[arg(long)]
    pub pixel_spacing: Option<f64>,
}

/// Aggregate row name.
pub const ALL: &str = "ALL";

fn pair(pred: &[PathBuf], truth: &[PathBuf]) -> Result<Vec<(String, PathBuf, PathBuf)>, CliError> {
    let mut by_name: BTreeMap<String, (Option<&PathBuf>, Option<&PathBuf>)> = BTreeMap::new();
    for p in pred {
        by_name.entry(fsutil::file_name(p)).or_default().0 = Some(p);
    }
    for t in truth {
        by_name.entry(fsutil::file_name(t)).or_default().1 = Some(t);
    }
    by_name
        .into_iter()
        .map(|(name, pair)| match pair {
            (Some(p), Some(t)) => Ok((name, p.clone(), t.clone())),
            (Some(only), None) | (None, Some(only)) => Err(CliError::UnpairedFile(only.clone())),
            (None, None) => unreachable!(),
        })
        .collect()
}

fn scene(
    pred: &Path,
    truth: &Path,
    format: MaskFormat,
    pixel_area: f64,
) -> Result<(SceneStats, ConfusionCounts), CliError> {
    let p = fsutil::read_mask(pred, format)?;
    let t = fsutil::read_mask(truth, format)?;
    let err = |e: morp::error::MetricsError| CliError::input(pred, e);
    let stats = scene_area_stats(&p, &t, pixel_area).map_err(err)?;
    let counts = confusion_counts(&p, &t).map_err(err)?;
    Ok((stats, counts))
}

pub fn run(ctx: &Context, args: Args) -> Result<Completion, CliError> {
    let mut section = ctx.file.metrics.clone().unwrap_or_default();
    if let Some(s) = args.pixel_spacing {
        section.pixel_spacing = s;
    }
    if !(section.pixel_spacing > 0.0 && section.pixel_spacing.is_finite()) {
        return Err(CliError::Config(
            "metrics.pixel_spacing must be positive".into(),
        ));
    }
    if ctx.dry_run {
        print_resolved(&section);
        return Ok(Completion::Full);
    }
    let pairs = pair(
        &fsutil::list_pngs(&args.pred)?,
        &fsutil::list_pngs(&args.truth)?,
    )?;
    let pixel_area = section.pixel_spacing * section.pixel_spacing;
    let rows: Vec<(SceneStats, ConfusionCounts)> = ctx.install(|| {
        pairs
            .par_iter()
            .map(|(_, p, t)| scene(p, t, section.mask_format, pixel_area))
            .collect::<Result<_, _>>()
    })?;

    let mut text = report::header();
    text.push('\n');
    let mut total = ConfusionCounts::default();
    let mut agg = SceneStats {
        iou: iou(&total),
        predicted_km2: [0.0; 5],
        false_positive_km2: [0.0; 5],
    };
    for ((name, _, _), (stats, counts)) in pairs.iter().zip(&rows) {
        text.push_str(&report::row(name, stats));
        text.push('\n');
        total.merge(counts);
        for c in 0..5 {
            agg.predicted_km2[c] += stats.predicted_km2[c];
            agg.false_positive_km2[c] += stats.false_positive_km2[c];
        }
    }
    agg.iou = iou(&total);
    text.push_str(&report::row(ALL, &agg));
    text.push('\n');

    match &args.out {
        Some(path) => fsutil::write(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(Completion::Full)
}

fn print_resolved(section: &MetricsSection) {
    let resolved = RunConfigFile {
        metrics: Some(section.clone()),
        ..Default::default()
    };
    print!("{}", resolved.to_toml());
}
