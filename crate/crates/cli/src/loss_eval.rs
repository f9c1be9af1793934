use std::path::{Path, PathBuf};

use morp::metrics::{composite_loss, total_loss, LossBreakdown, ProbMap};
use morp::MaskFormat;
use serde::Serialize;

use crate::config::{LossSection, RunConfigFile};
use crate::error::{CliError, Completion};
use crate::{fsutil, Context};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Probability map JSON: `{"height", "width", "data"}` with `data`
    /// holding five class probabilities per pixel, row-major.
    #[arg(long)]
    pub prob: PathBuf,
    /// Ground-truth mask.
    #[arg(long)]
    pub truth: PathBuf,
    /// Probability map of a synthetic sample.
    #[arg(long, requires = "synth_truth")]
    pub synth_prob: Option<PathBuf>,
    /// Ground-truth mask of the synthetic sample.
    #[arg(long, requires = "synth_prob")]
    pub synth_truth: Option<PathBuf>,
    #[arg(long, value_parser = ["indexed", "palette-rgb"], default_value = "indexed")]
    pub mask_format: String,
}

#[derive(Serialize)]
struct Report {
    real: LossBreakdown,
    #[serde(skip_serializing_if = "Option::is_none")]
    synth: Option<LossBreakdown>,
    total: f64,
}

fn evaluate(
    prob: &Path,
    truth: &Path,
    format: MaskFormat,
    section: &LossSection,
) -> Result<LossBreakdown, CliError> {
    let text = std::fs::read_to_string(prob).map_err(|e| CliError::io(prob, e))?;
    let map: ProbMap = serde_json::from_str(&text).map_err(|e| CliError::input(prob, e))?;
    let truth_map = fsutil::read_mask(truth, format)?;
    composite_loss(&map, &truth_map, &section.weights).map_err(|e| CliError::input(prob, e))
}

pub fn run(ctx: &Context, args: Args) -> Result<Completion, CliError> {
    let section = ctx.file.loss.clone().unwrap_or_default();
    section
        .weights
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if !section.synth_lambda.is_finite() || section.synth_lambda < 0.0 {
        return Err(CliError::Config(
            "loss.synth_lambda must be finite and >= 0".into(),
        ));
    }
    if ctx.dry_run {
        let resolved = RunConfigFile {
            loss: Some(section),
            ..Default::default()
        };
        print!("{}", resolved.to_toml());
        return Ok(Completion::Full);
    }
    let format = match args.mask_format.as_str() {
        "palette-rgb" => MaskFormat::PaletteRgb,
        _ => MaskFormat::Indexed,
    };
    let real = evaluate(&args.prob, &args.truth, format, &section)?;
    let synth = match (&args.synth_prob, &args.synth_truth) {
        (Some(p), Some(t)) => Some(evaluate(p, t, format, &section)?),
        _ => None,
    };
    let total = match &synth {
        Some(s) => total_loss(
            real.total,
            s.total,
            section.synth_lambda,
            section.synth_scale,
        ),
        None => real.total,
    };
    let report = Report { real, synth, total };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(Completion::Full)
}
