//! Configuration of the perturbation engine.
//!
//! The TOML layout mirrors the struct nesting:
//!
//! ```toml
//! seed = 7
//! [selection]   # which regions are edited
//! [placement]   # rigid moves and collision sets
//! [placement.flat]
//! [apex]        # curvature and apex discovery; optional [apex.oil] / [apex.lookalike]
//! [edit.oil]    # per-class bulge / wedge parameters
//! [edit.lookalike]
//! [cleanup]
//! ```
//!
//! Unknown keys are rejected.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::CurvatureParams;
use crate::labelmap::{ClassId, Connectivity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// By area, largest first.
    Largest,
    /// Uniformly shuffled.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionConfig {
    #[serde(default = "default_targets")]
    pub target_classes: Vec<ClassId>,
    /// Number of regions moved and edited per mask.
    pub n_regions: usize,
    pub mode: SelectionMode,
    /// Balance the selection across classes.
    #[serde(default)]
    pub diversity: bool,
    /// Area fraction of the mask above which the largest oil region is always
    /// edited.
    pub large_oil_fraction: f64,
    #[serde(default)]
    pub connectivity: Connectivity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    #[serde(default = "default_true")]
    pub enabled: bool,
    /// Minimum number of consecutive near-straight contour points.
    pub min_run: usize,
    /// Curvature magnitude below which a point counts as straight.
    pub max_abs_curvature: f64,
    #[serde(default = "default_max_runs")]
    pub max_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    /// Maximum translation length in pixels.
    pub max_shift: f64,
    /// Rotation range `[lo, hi)` in radians.
    #[serde(default = "default_angle_range")]
    pub angle_range: [f64; 2],
    #[serde(default = "default_forbid")]
    pub forbid: Vec<ClassId>,
    #[serde(default = "default_allow")]
    pub allow: Vec<ClassId>,
    #[serde(default = "default_retries")]
    pub max_paste_retries: usize,
    pub flat: FlatConfig,
}

/// Per-class overrides of the apex discovery parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApexOverride {
    pub window: Option<usize>,
    pub poly_order: Option<usize>,
    pub quantile: Option<f64>,
    pub min_distance: Option<usize>,
    pub radial_boost: Option<f64>,
    pub step: Option<usize>,
    pub apices_per_region: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApexConfig {
    pub window: usize,
    pub poly_order: usize,
    /// Prominence threshold quantile of the boosted positive curvature.
    pub quantile: f64,
    /// Minimum circular index distance between apices.
    pub min_distance: usize,
    pub radial_boost: f64,
    /// Central-difference step.
    pub step: usize,
    pub apices_per_region: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oil: Option<ApexOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lookalike: Option<ApexOverride>,
}

/// Apex parameters after applying class overrides.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ApexParams {
    pub curvature: CurvatureParams,
    pub quantile: f64,
    pub min_distance: usize,
    pub apices_per_region: usize,
}

/// Bulge and wedge parameters of one class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditParams {
    /// Fan half-angle in radians.
    pub half_angle: f64,
    pub n_rays: usize,
    /// Probability that an apex edit expands rather than shrinks.
    pub p_expand: f64,
    pub s_expand: f64,
    pub s_shrink: f64,
    /// Growth radius: cap of the outward ray length in expand mode.
    pub r_max_expand: f64,
    pub r_max_shrink: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EditConfig {
    pub oil: EditParams,
    pub lookalike: EditParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanupConfig {
    /// Components of target classes smaller than this are removed.
    pub min_px: usize,
    #[serde(default = "default_fill")]
    pub fill: ClassId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorpConfig {
    pub seed: u64,
    pub selection: SelectionConfig,
    pub placement: PlacementConfig,
    pub apex: ApexConfig,
    pub edit: EditConfig,
    pub cleanup: CleanupConfig,
}

fn default_targets() -> Vec<ClassId> {
    vec![ClassId::Oil, ClassId::LookAlike]
}
fn default_true() -> bool {
    true
}
fn default_max_runs() -> usize {
    2
}
fn default_angle_range() -> [f64; 2] {
    [-PI, PI]
}
fn default_forbid() -> Vec<ClassId> {
    vec![ClassId::Land]
}
fn default_allow() -> Vec<ClassId> {
    vec![ClassId::Sea]
}
fn default_retries() -> usize {
    10
}
fn default_eps() -> f64 {
    1e-6
}
fn default_fill() -> ClassId {
    ClassId::Sea
}

impl MorpConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml_str(s: &str) -> Result<MorpConfig, ConfigError> {
        let cfg: MorpConfig = toml::from_str(s).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    /// A moderate working preset for 128–512 px masks. These values are
    /// starting points, not tuned constants.
    pub fn preset(seed: u64) -> MorpConfig {
        let edit = EditParams {
            half_angle: 0.5,
            n_rays: 9,
            p_expand: 0.6,
            s_expand: 1.3,
            s_shrink: 0.5,
            r_max_expand: 24.0,
            r_max_shrink: 12.0,
        };
        MorpConfig {
            seed,
            selection: SelectionConfig {
                target_classes: default_targets(),
                n_regions: 4,
                mode: SelectionMode::Largest,
                diversity: true,
                large_oil_fraction: 0.05,
                connectivity: Connectivity::Eight,
            },
            placement: PlacementConfig {
                max_shift: 24.0,
                angle_range: default_angle_range(),
                forbid: default_forbid(),
                allow: default_allow(),
                max_paste_retries: default_retries(),
                flat: FlatConfig {
                    enabled: true,
                    min_run: 8,
                    max_abs_curvature: 0.02,
                    max_runs: 2,
                },
            },
            apex: ApexConfig {
                window: 15,
                poly_order: 3,
                quantile: 0.95,
                min_distance: 15,
                radial_boost: 0.0,
                step: 2,
                apices_per_region: 3,
                eps: default_eps(),
                oil: None,
                lookalike: None,
            },
            edit: EditConfig {
                oil: edit.clone(),
                lookalike: edit,
            },
            cleanup: CleanupConfig {
                min_px: 12,
                fill: ClassId::Sea,
            },
        }
    }

    pub fn edit_params(&self, class: ClassId) -> Result<&EditParams, ConfigError> {
        match class {
            ClassId::Oil => Ok(&self.edit.oil),
            ClassId::LookAlike => Ok(&self.edit.lookalike),
            other => Err(ConfigError::MissingClassParams(other)),
        }
    }

    /// Apex parameters for `class`: the class override where given, else the
    /// global value.
    pub fn apex_params(&self, class: ClassId) -> ApexParams {
        let a = &self.apex;
        let none = ApexOverride::default();
        let o = match class {
            ClassId::Oil => a.oil.as_ref().unwrap_or(&none),
            ClassId::LookAlike => a.lookalike.as_ref().unwrap_or(&none),
            _ => &none,
        };
        ApexParams {
            curvature: CurvatureParams {
                window: o.window.unwrap_or(a.window),
                poly_order: o.poly_order.unwrap_or(a.poly_order),
                step: o.step.unwrap_or(a.step),
                eps: a.eps,
                radial_boost: o.radial_boost.unwrap_or(a.radial_boost),
            },
            quantile: o.quantile.unwrap_or(a.quantile),
            min_distance: o.min_distance.unwrap_or(a.min_distance),
            apices_per_region: o.apices_per_region.unwrap_or(a.apices_per_region),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        use ConfigError as E;
        let s = &self.selection;
        if s.target_classes.is_empty() {
            return Err(E::invalid("selection.target_classes", "must not be empty"));
        }
        for c in &s.target_classes {
            if !matches!(c, ClassId::Oil | ClassId::LookAlike) {
                return Err(E::invalid(
                    "selection.target_classes",
                    format!(
                        "{c} has no edit section; only oil (1) and look-alike (2) are editable"
                    ),
                ));
            }
        }
        if s.n_regions == 0 {
            return Err(E::invalid("selection.n_regions", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&s.large_oil_fraction) {
            return Err(E::invalid(
                "selection.large_oil_fraction",
                "must lie in [0, 1]",
            ));
        }

        let p = &self.placement;
        if !(p.max_shift >= 0.0 && p.max_shift.is_finite()) {
            return Err(E::invalid("placement.max_shift", "must be finite and >= 0"));
        }
        if !(p.angle_range[0] < p.angle_range[1]) {
            return Err(E::invalid(
                "placement.angle_range",
                "lower bound must be below upper bound",
            ));
        }
        if p.forbid.iter().any(|c| p.allow.contains(c)) {
            return Err(E::invalid("placement.allow", "overlaps placement.forbid"));
        }
        if p.allow.contains(&ClassId::Land) {
            return Err(E::invalid("placement.allow", "land is never writable"));
        }
        if s.target_classes.iter().any(|c| p.forbid.contains(c)) {
            return Err(E::invalid("placement.forbid", "contains a target class"));
        }
        if p.max_paste_retries == 0 {
            return Err(E::invalid("placement.max_paste_retries", "must be >= 1"));
        }
        if p.flat.min_run == 0 {
            return Err(E::invalid("placement.flat.min_run", "must be >= 1"));
        }
        if !(p.flat.max_abs_curvature >= 0.0) {
            return Err(E::invalid(
                "placement.flat.max_abs_curvature",
                "must be >= 0",
            ));
        }

        let a = &self.apex;
        if !(a.eps > 0.0) {
            return Err(E::invalid("apex.eps", "must be > 0"));
        }
        for class in [ClassId::Oil, ClassId::LookAlike] {
            let ap = self.apex_params(class);
            let prefix = |f: &str| {
                if (class == ClassId::Oil && a.oil.is_some())
                    || (class == ClassId::LookAlike && a.lookalike.is_some())
                {
                    format!(
                        "apex.{}.{f}",
                        if class == ClassId::Oil {
                            "oil"
                        } else {
                            "lookalike"
                        }
                    )
                } else {
                    format!("apex.{f}")
                }
            };
            let c = ap.curvature;
            if c.window < 3 || c.window.is_multiple_of(2) {
                return Err(E::invalid(&prefix("window"), "must be odd and >= 3"));
            }
            if c.poly_order >= c.window {
                return Err(E::invalid(
                    &prefix("poly_order"),
                    "must be below the window",
                ));
            }
            if c.step == 0 {
                return Err(E::invalid(&prefix("step"), "must be >= 1"));
            }
            if !(ap.quantile > 0.0 && ap.quantile < 1.0) {
                return Err(E::invalid(&prefix("quantile"), "must lie in (0, 1)"));
            }
            if ap.min_distance == 0 {
                return Err(E::invalid(&prefix("min_distance"), "must be >= 1"));
            }
            if ap.apices_per_region == 0 {
                return Err(E::invalid(&prefix("apices_per_region"), "must be >= 1"));
            }
            if !c.radial_boost.is_finite() {
                return Err(E::invalid(&prefix("radial_boost"), "must be finite"));
            }
        }

        for (name, e) in [("oil", &self.edit.oil), ("lookalike", &self.edit.lookalike)] {
            let f = |k: &str| format!("edit.{name}.{k}");
            if !(e.half_angle > 0.0 && e.half_angle <= PI / 2.0) {
                return Err(E::invalid(&f("half_angle"), "must lie in (0, pi/2]"));
            }
            if e.n_rays < 2 {
                return Err(E::invalid(&f("n_rays"), "must be >= 2"));
            }
            if !(0.0..=1.0).contains(&e.p_expand) {
                return Err(E::invalid(&f("p_expand"), "must lie in [0, 1]"));
            }
            if !(e.s_expand >= 1.0 && e.s_expand.is_finite()) {
                return Err(E::invalid(&f("s_expand"), "must be >= 1"));
            }
            if !(e.s_shrink > 0.0 && e.s_shrink.is_finite()) {
                return Err(E::invalid(&f("s_shrink"), "must be > 0"));
            }
            if !(e.r_max_expand >= 1.0 && e.r_max_expand.is_finite()) {
                return Err(E::invalid(&f("r_max_expand"), "must be >= 1"));
            }
            if !(e.r_max_shrink >= 1.0 && e.r_max_shrink.is_finite()) {
                return Err(E::invalid(&f("r_max_shrink"), "must be >= 1"));
            }
        }

        let c = &self.cleanup;
        if c.min_px == 0 {
            return Err(E::invalid("cleanup.min_px", "must be >= 1"));
        }
        if s.target_classes.contains(&c.fill) {
            return Err(E::invalid("cleanup.fill", "must not be a target class"));
        }
        if p.forbid.contains(&c.fill) {
            return Err(E::invalid("cleanup.fill", "must not be a forbidden class"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_is_valid_and_roundtrips() {
        let cfg = MorpConfig::preset(3);
        cfg.validate().unwrap();
        let text = cfg.to_toml_string();
        assert_eq!(MorpConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut text = MorpConfig::preset(3).to_toml_string();
        text = text.replace("[cleanup]\n", "[cleanup]\nbogus = 1\n");
        let err = MorpConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn overlapping_sets_rejected() {
        let mut cfg = MorpConfig::preset(3);
        cfg.placement.allow.push(ClassId::Ship);
        cfg.placement.forbid.push(ClassId::Ship);
        assert!(
            matches!(cfg.validate(), Err(ConfigError::Invalid { field, .. }) if field == "placement.allow")
        );
    }

    #[test]
    fn land_never_allowed() {
        let mut cfg = MorpConfig::preset(3);
        cfg.placement.forbid.clear();
        cfg.placement.allow.push(ClassId::Land);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn s_expand_below_one_rejected() {
        let mut cfg = MorpConfig::preset(3);
        cfg.edit.oil.s_expand = 0.9;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn class_override_wins() {
        let mut cfg = MorpConfig::preset(3);
        cfg.apex.lookalike = Some(ApexOverride {
            window: Some(21),
            ..Default::default()
        });
        assert_eq!(cfg.apex_params(ClassId::LookAlike).curvature.window, 21);
        assert_eq!(cfg.apex_params(ClassId::Oil).curvature.window, 15);
    }

    #[test]
    fn minimal_document_fills_defaults() {
        let text = r#"
seed = 1
[selection]
n_regions = 2
mode = "random"
large_oil_fraction = 0.1
[placement]
max_shift = 10
[placement.flat]
min_run = 8
max_abs_curvature = 0.03
[apex]
window = 9
poly_order = 2
quantile = 0.8
min_distance = 6
radial_boost = 0.0
step = 1
apices_per_region = 2
[edit.oil]
half_angle = 0.4
n_rays = 7
p_expand = 0.5
s_expand = 1.0
s_shrink = 0.5
r_max_expand = 20
r_max_shrink = 10
[edit.lookalike]
half_angle = 0.4
n_rays = 7
p_expand = 0.5
s_expand = 1.0
s_shrink = 0.5
r_max_expand = 20
r_max_shrink = 10
[cleanup]
min_px = 5
"#;
        let cfg = MorpConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.placement.forbid, vec![ClassId::Land]);
        assert_eq!(cfg.placement.allow, vec![ClassId::Sea]);
        assert_eq!(cfg.placement.max_paste_retries, 10);
        assert_eq!(
            cfg.selection.target_classes,
            vec![ClassId::Oil, ClassId::LookAlike]
        );
        assert_eq!(cfg.selection.connectivity, Connectivity::Eight);
        assert_eq!(cfg.apex.eps, 1e-6);
    }
}
