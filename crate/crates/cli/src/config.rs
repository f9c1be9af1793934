//! Run configuration file: the engine sections plus per-command sections.

use std::path::Path;

use morp::config::{ApexConfig, CleanupConfig, EditConfig, PlacementConfig, SelectionConfig};
use morp::engine::Regime;
use morp::mask_io::MaskFormat;
use morp::metrics::{LossWeights, SynthScale};
use morp::patches::{MultiscaleParams, PercentileMethod, SlidingParams};
use morp::MorpConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apex: Option<ApexConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edit: Option<EditConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cleanup: Option<CleanupConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patches: Option<PatchSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_regime")]
    pub regime: Regime,
    #[serde(default = "default_multiplier")]
    pub multiplier: usize,
    #[serde(default)]
    pub mask_format: MaskFormat,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            regime: default_regime(),
            multiplier: default_multiplier(),
            mask_format: MaskFormat::default(),
        }
    }
}

fn default_regime() -> Regime {
    Regime::M100
}
fn default_multiplier() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSection {
    #[serde(default)]
    pub weights: LossWeights,
    #[serde(default)]
    pub synth_lambda: f64,
    #[serde(default)]
    pub synth_scale: SynthScale,
}

impl Default for LossSection {
    fn default() -> Self {
        LossSection {
            weights: LossWeights::default(),
            synth_lambda: 0.0,
            synth_scale: SynthScale::Raw,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSection {
    #[serde(default = "default_true")]
    pub median: bool,
    #[serde(default = "default_lo")]
    pub lo_percentile: f64,
    #[serde(default = "default_hi")]
    pub hi_percentile: f64,
    #[serde(default)]
    pub percentile_method: PercentileMethod,
    #[serde(default)]
    pub sliding: SlidingParams,
    /// Multi-scale windows are produced only when this section is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiscale: Option<MultiscaleParams>,
    #[serde(default)]
    pub mask_format: MaskFormat,
    /// Metres per pixel.
    #[serde(default = "default_spacing")]
    pub pixel_spacing: f64,
}

impl Default for PatchSection {
    fn default() -> Self {
        PatchSection {
            median: true,
            lo_percentile: default_lo(),
            hi_percentile: default_hi(),
            percentile_method: PercentileMethod::default(),
            sliding: SlidingParams::default(),
            multiscale: None,
            mask_format: MaskFormat::default(),
            pixel_spacing: default_spacing(),
        }
    }
}

fn default_true() -> bool {
    true
}
fn default_lo() -> f64 {
    0.5
}
fn default_hi() -> f64 {
    97.5
}
fn default_spacing() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    #[serde(default = "default_spacing")]
    pub pixel_spacing: f64,
    #[serde(default)]
    pub mask_format: MaskFormat,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            pixel_spacing: default_spacing(),
            mask_format: MaskFormat::default(),
        }
    }
}

impl RunConfigFile {
    pub fn load(path: Option<&Path>) -> Result<RunConfigFile, CliError> {
        let Some(path) = path else {
            return Ok(RunConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Seed from the command line, else from the file. Never invented.
    pub fn require_seed(&self, cli: Option<u64>) -> Result<u64, CliError> {
        cli.or(self.seed).ok_or_else(|| {
            CliError::Config("a seed is required: pass --seed or set `seed` in the config".into())
        })
    }

    /// Engine configuration: either every engine section is given, or none
    /// is and the built-in preset applies.
    pub fn morp_config(&self, seed: u64) -> Result<MorpConfig, CliError> {
        let present = [
            ("selection", self.selection.is_some()),
            ("placement", self.placement.is_some()),
            ("apex", self.apex.is_some()),
            ("edit", self.edit.is_some()),
            ("cleanup", self.cleanup.is_some()),
        ];
        let cfg = if present.iter().all(|(_, p)| !p) {
            MorpConfig::preset(seed)
        } else if let Some((name, _)) = present.iter().find(|(_, p)| !p) {
            return Err(CliError::Config(format!(
                "config section [{name}] is missing (give all engine sections or none)"
            )));
        } else {
            MorpConfig {
                seed,
                selection: self.selection.clone().expect("checked"),
                placement: self.placement.clone().expect("checked"),
                apex: self.apex.clone().expect("checked"),
                edit: self.edit.clone().expect("checked"),
                cleanup: self.cleanup.clone().expect("checked"),
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_morp(mut self, cfg: &MorpConfig) -> Self {
        self.seed = Some(cfg.seed);
        self.selection = Some(cfg.selection.clone());
        self.placement = Some(cfg.placement.clone());
        self.apex = Some(cfg.apex.clone());
        self.edit = Some(cfg.edit.clone());
        self.cleanup = Some(cfg.cleanup.clone());
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
