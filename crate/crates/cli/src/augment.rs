use std::io::Write as _;
use std::path::{Path, PathBuf};

use morp::engine::{check_unique, plan_batch, run_job, JobKind, Regime};
use morp::{decode_mask, encode_mask, EditRecord, LabelMap};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfigFile, RunSection};
use crate::error::{CliError, Completion};
use crate::{fsutil, Context};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Directory of input masks (`*.png`).
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub output: PathBuf,
    /// nomove, m00, m50 or m100.
    #[arg(long)]
    pub regime: Option<Regime>,
    /// Outputs per input mask.
    #[arg(long)]
    pub multiplier: Option<usize>,
}

#[derive(Serialize)]
struct JobLine<'a> {
    file: &'a str,
    source: &'a str,
    replicate: usize,
    seed: u64,
    kind: JobKind,
    edits: &'a [EditRecord],
}

struct Input {
    name: String,
    stem: String,
    bytes: Vec<u8>,
    mask: LabelMap,
}

fn output_name(stem: &str, replicate: usize, multiplier: usize) -> String {
    if multiplier == 1 {
        format!("{stem}.png")
    } else {
        format!("{stem}_r{replicate}.png")
    }
}

pub fn run(ctx: &Context, args: Args) -> Result<Completion, CliError> {
    let seed = ctx.file.require_seed(ctx.seed)?;
    let cfg = ctx.file.morp_config(seed)?;
    let mut run = ctx.file.run.clone().unwrap_or_default();
    if let Some(r) = args.regime {
        run.regime = r;
    }
    if let Some(m) = args.multiplier {
        run.multiplier = m;
    }
    if run.multiplier == 0 {
        return Err(CliError::Config("multiplier must be >= 1".into()));
    }
    if ctx.dry_run {
        print_resolved(&cfg, &run);
        return Ok(Completion::Full);
    }

    let paths = fsutil::list_pngs(&args.input)?;
    let loaded: Vec<Result<Input, CliError>> =
        ctx.install(|| paths.par_iter().map(|p| load(p, &run)).collect());
    let mut inputs = Vec::with_capacity(loaded.len());
    let mut skipped = 0usize;
    for r in loaded {
        match r {
            Ok(i) => inputs.push(i),
            Err(e @ CliError::Input { .. }) => {
                log::warn!("skipping {e}");
                skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }

    let jobs = plan_batch(inputs.len(), run.regime, run.multiplier, seed)?;
    let results = ctx.install(|| {
        jobs.par_iter()
            .map(|j| run_job(&inputs[j.mask].mask, j, &cfg))
            .collect::<Vec<_>>()
    });
    if run.multiplier > 1 {
        check_unique(results.iter().map(|a| &a.result))?;
    }

    let encoded: Vec<Vec<u8>> = ctx.install(|| {
        jobs.par_iter()
            .zip(&results)
            .map(|(j, a)| match j.kind {
                JobKind::Identity => inputs[j.mask].bytes.clone(),
                _ => encode_mask(&a.result, run.mask_format),
            })
            .collect()
    });

    std::fs::create_dir_all(&args.output).map_err(|e| CliError::io(&args.output, e))?;
    let mut records = Vec::new();
    let mut failed = false;
    for ((job, aug), bytes) in jobs.iter().zip(&results).zip(&encoded) {
        let input = &inputs[job.mask];
        let name = output_name(&input.stem, job.replicate, run.multiplier);
        fsutil::write(&args.output.join(&name), bytes)?;
        failed |= aug.records.iter().any(EditRecord::has_failure);
        let line = JobLine {
            file: &name,
            source: &input.name,
            replicate: job.replicate,
            seed: job.seed,
            kind: job.kind,
            edits: &aug.records,
        };
        serde_json::to_writer(&mut records, &line).expect("record serializes");
        records.write_all(b"\n").expect("in-memory write");
    }
    fsutil::write(&args.output.join("records.jsonl"), &records)?;
    log::info!("wrote {} masks to {}", jobs.len(), args.output.display());

    Ok(if failed || skipped > 0 {
        Completion::Partial
    } else {
        Completion::Full
    })
}

fn load(path: &Path, run: &RunSection) -> Result<Input, CliError> {
    let bytes = fsutil::read(path)?;
    let mask = decode_mask(&bytes, run.mask_format).map_err(|e| CliError::input(path, e))?;
    Ok(Input {
        name: fsutil::file_name(path),
        stem: fsutil::file_stem(path),
        bytes,
        mask,
    })
}

fn print_resolved(cfg: &morp::MorpConfig, run: &RunSection) {
    let resolved = RunConfigFile {
        run: Some(run.clone()),
        ..Default::default()
    }
    .with_morp(cfg);
    print!("{}", resolved.to_toml());
}
