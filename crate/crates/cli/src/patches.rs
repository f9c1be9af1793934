use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::PathBuf;

use morp::encode_mask;
use morp::mask_io::{decode_intensity, encode_intensity16};
use morp::patches::{
    extract_patches, hard_negative_patches, median_filter_3x3, multiscale_patches, parse_manifest,
    percentile_normalize, split_manifest, ManifestRow, Patch, PatchKind, Scene,
};
use morp::rng::{derive_seed, hash_str, tag};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{PatchSection, RunConfigFile};
use crate::error::{CliError, Completion};
use crate::{fsutil, Context};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Scene manifest (CSV).
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory holding `scene_<Img>.png` intensities and
    /// `scene_<Img>_mask.png` label maps.
    #[arg(long)]
    pub scenes: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub output: PathBuf,
    /// Directory of model outputs `scene_<Img>_pred.png`; enables hard
    /// negative mining.
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Serialize)]
struct IndexLine<'a> {
    scene: &'a str,
    split: morp::patches::Split,
    kind: PatchKind,
    row: usize,
    col: usize,
    size: usize,
    image: String,
    mask: String,
}

fn validate(section: &PatchSection) -> Result<(), CliError> {
    let s = &section.sliding;
    let bad = |m: &str| Err(CliError::Config(format!("patches: {m}")));
    if !(0.0 <= section.lo_percentile
        && section.lo_percentile < section.hi_percentile
        && section.hi_percentile <= 100.0)
    {
        return bad("need 0 <= lo_percentile < hi_percentile <= 100");
    }
    if s.window == 0 || s.stride == 0 {
        return bad("sliding.window and sliding.stride must be >= 1");
    }
    if !(s.neg_pos_ratio >= 0.0 && s.neg_pos_ratio.is_finite()) {
        return bad("sliding.neg_pos_ratio must be finite and >= 0");
    }
    if !(section.pixel_spacing > 0.0 && section.pixel_spacing.is_finite()) {
        return bad("pixel_spacing must be positive");
    }
    if let Some(m) = &section.multiscale {
        if m.out_size == 0 || m.min_side == 0 || m.min_side > m.max_side || !(m.margin >= 0.0) {
            return bad("multiscale needs 1 <= min_side <= max_side, out_size >= 1, margin >= 0");
        }
    }
    Ok(())
}

pub fn run(ctx: &Context, args: Args) -> Result<Completion, CliError> {
    let seed = ctx.file.require_seed(ctx.seed)?;
    let section = ctx.file.patches.clone().unwrap_or_default();
    validate(&section)?;
    if ctx.dry_run {
        let resolved = RunConfigFile {
            seed: Some(seed),
            patches: Some(section),
            ..Default::default()
        };
        print!("{}", resolved.to_toml());
        return Ok(Completion::Full);
    }

    let text =
        std::fs::read_to_string(&args.manifest).map_err(|e| CliError::io(&args.manifest, e))?;
    let manifest = split_manifest(parse_manifest(&text)?)?;

    let per_scene: Vec<Result<Option<Vec<Patch>>, CliError>> = ctx.install(|| {
        manifest
            .rows
            .par_iter()
            .map(|row| scene_patches(row, &args, &section, seed))
            .collect()
    });

    let mut index = Vec::new();
    let mut skipped = 0usize;
    for (row, result) in manifest.rows.iter().zip(per_scene) {
        let Some(patches) = result? else {
            skipped += 1;
            continue;
        };
        let mut seen = BTreeSet::new();
        for p in patches {
            if !seen.insert((p.kind, p.origin)) {
                continue;
            }
            let o = p.origin;
            let dir = format!("{}/{}", row.split, row.img);
            let base = format!("{dir}/{}_{}_{}_{}", p.kind, o.row, o.col, o.size);
            let image = format!("{base}.png");
            let mask = format!("{base}_mask.png");
            let side = p.labels.width();
            fsutil::write(
                &args.output.join(&image),
                &encode_intensity16(side, side, &p.intensity),
            )?;
            fsutil::write(
                &args.output.join(&mask),
                &encode_mask(&p.labels, section.mask_format),
            )?;
            let line = IndexLine {
                scene: &row.img,
                split: row.split,
                kind: p.kind,
                row: o.row,
                col: o.col,
                size: o.size,
                image,
                mask,
            };
            serde_json::to_writer(&mut index, &line).expect("index line serializes");
            index.write_all(b"\n").expect("in-memory write");
        }
    }
    fsutil::write(&args.output.join("index.jsonl"), &index)?;
    Ok(if skipped > 0 {
        Completion::Partial
    } else {
        Completion::Full
    })
}

/// `None` when the scene files are absent.
fn scene_patches(
    row: &ManifestRow,
    args: &Args,
    section: &PatchSection,
    seed: u64,
) -> Result<Option<Vec<Patch>>, CliError> {
    let image = args.scenes.join(format!("scene_{}.png", row.img));
    let mask = args.scenes.join(format!("scene_{}_mask.png", row.img));
    if !image.is_file() || !mask.is_file() {
        log::warn!(
            "scene {} skipped: {} or {} missing",
            row.img,
            image.display(),
            mask.display()
        );
        return Ok(None);
    }
    let labels = fsutil::read_mask(&mask, section.mask_format)?;
    let (w, h, raw) =
        decode_intensity(&fsutil::read(&image)?).map_err(|e| CliError::input(&image, e))?;
    if (w, h) != (labels.width(), labels.height()) {
        return Err(CliError::input(
            &mask,
            format!(
                "size {}x{} differs from intensity {w}x{h}",
                labels.width(),
                labels.height()
            ),
        ));
    }
    let filtered = if section.median {
        median_filter_3x3(&raw, w, h)?
    } else {
        raw
    };
    let normalized = percentile_normalize(
        &filtered,
        section.lo_percentile,
        section.hi_percentile,
        section.percentile_method,
    )?;
    let scene = Scene::new(row.img.clone(), normalized, labels, section.pixel_spacing)?;

    let scene_seed = derive_seed(seed, &[tag::PATCHES, hash_str(&row.img)]);
    let mut out = extract_patches(&scene, &section.sliding, scene_seed)?;
    if let Some(ms) = &section.multiscale {
        out.extend(multiscale_patches(&scene, ms, scene_seed)?);
    }
    if let Some(dir) = &args.predictions {
        let pred_path = dir.join(format!("scene_{}_pred.png", row.img));
        if pred_path.is_file() {
            let pred = fsutil::read_mask(&pred_path, section.mask_format)?;
            out.extend(hard_negative_patches(
                &scene,
                &pred,
                section.sliding.window,
                section.sliding.stride,
            )?);
        } else {
            log::info!("no prediction for scene {}", row.img);
        }
    }
    Ok(Some(out))
}
