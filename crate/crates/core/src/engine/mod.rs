//! Region perturbation: placement of selected regions, then curvature-guided
//! bulges and wedges on re-extracted regions.

pub mod apex_edit;
pub mod batch;
pub mod select;
pub mod transform;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use apex_edit::{
    apex_edit_multi, apex_edit_single, find_apices, flat_aware_bulges, ray_length, ApexEdit,
    ApexRecord, EditMode, MultiEdit, RayRecord,
};
pub use batch::{batch_generate, check_unique, plan_batch, run_job, Job, JobKind, Regime};
pub use select::select_regions;
pub use transform::{restore_near_origin, rigid_transform, rotate_no_crop, try_paste, Shape};

use crate::config::MorpConfig;
use crate::labelmap::{connected_components, remove_small, ClassId, LabelMap, Region};
use crate::rng::{self, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Placement,
    Apex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementOutcome {
    Accepted,
    Restored,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    /// Angle of the accepted (or last) attempt.
    pub theta: f64,
    /// `[d_col, d_row]` of the accepted (or last) attempt.
    pub shift: [isize; 2],
    pub attempts: usize,
    pub outcome: PlacementOutcome,
    /// Pixels written when restoring near the origin.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restored_px: Option<usize>,
}

/// Provenance of one edited region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditRecord {
    pub stage: Stage,
    /// Ordinal of the region within its stage's selection.
    pub region: usize,
    pub class: ClassId,
    pub area_before: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub placement: Option<PlacementRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flat_bulges: Vec<ApexRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub apices: Vec<ApexRecord>,
    /// Apex candidates found before spreading.
    #[serde(default)]
    pub candidates: usize,
    /// Included as the dominant oil region.
    #[serde(default)]
    pub forced: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Set when the region could not be edited.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EditRecord {
    /// True when the region or one of its apices was skipped on error.
    pub fn has_failure(&self) -> bool {
        self.error.is_some()
            || self
                .apices
                .iter()
                .chain(&self.flat_bulges)
                .any(|a| a.skipped.is_some())
    }

    fn new(stage: Stage, region: usize, class: ClassId, area_before: usize) -> Self {
        EditRecord {
            stage,
            region,
            class,
            area_before,
            placement: None,
            flat_bulges: Vec::new(),
            apices: Vec::new(),
            candidates: 0,
            forced: false,
            note: None,
            error: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedMask {
    pub result: LabelMap,
    pub records: Vec<EditRecord>,
    pub seed: u64,
}

/// Which stages run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stages {
    PlacementOnly,
    Full,
}

/// Full perturbation of `map` under `cfg` (placement, then apex edits, then
/// small-component cleanup). A pure function of its inputs.
pub fn morp_augment(map: &LabelMap, cfg: &MorpConfig) -> AugmentedMask {
    augment(map, cfg, Stages::Full)
}

pub fn augment(map: &LabelMap, cfg: &MorpConfig, stages: Stages) -> AugmentedMask {
    let mut canvas = map.clone();
    let mut records = Vec::new();
    placement_stage(&mut canvas, cfg, &mut records);
    if stages == Stages::Full {
        apex_stage(&mut canvas, cfg, &mut records);
    }
    let result = cleanup(&canvas, cfg);
    for (a, b) in map.classes().iter().zip(result.classes()) {
        if cfg.placement.forbid.contains(a) {
            assert_eq!(a, b, "forbidden pixel overwritten");
        }
    }
    AugmentedMask {
        result,
        records,
        seed: cfg.seed,
    }
}

fn cleanup(map: &LabelMap, cfg: &MorpConfig) -> LabelMap {
    remove_small(
        map,
        cfg.cleanup.min_px,
        &cfg.selection.target_classes,
        cfg.cleanup.fill,
        cfg.selection.connectivity,
    )
}

fn target_components(map: &LabelMap, cfg: &MorpConfig) -> Vec<Region> {
    let mut comps: Vec<Region> = cfg
        .selection
        .target_classes
        .iter()
        .flat_map(|&c| connected_components(map, c, cfg.selection.connectivity))
        .collect();
    comps.sort_by_key(|r| (r.bbox().min_row, r.bbox().min_col, r.pixels()[0], r.class()));
    comps
}

/// Integer shift `(d_col, d_row)` uniform over lattice points with
/// `d_col² + d_row² <= max_shift²`.
pub fn sample_shift<R: Rng + ?Sized>(max_shift: f64, rng: &mut R) -> (isize, isize) {
    let m = max_shift.floor() as i64;
    if m < 1 {
        return (0, 0);
    }
    let r2 = max_shift * max_shift;
    loop {
        let dx = rng.random_range(-m..=m);
        let dy = rng.random_range(-m..=m);
        if ((dx * dx + dy * dy) as f64) <= r2 {
            return (dx as isize, dy as isize);
        }
    }
}

fn headroom(cfg: &MorpConfig) -> usize {
    cfg.edit
        .oil
        .r_max_expand
        .max(cfg.edit.lookalike.r_max_expand)
        .ceil() as usize
        + 2
}

fn placement_stage(canvas: &mut LabelMap, cfg: &MorpConfig, records: &mut Vec<EditRecord>) {
    let comps = target_components(canvas, cfg);
    if comps.is_empty() {
        return;
    }
    let sel = &cfg.selection;
    let picked = select_regions(
        &comps,
        sel.n_regions,
        sel.mode,
        sel.diversity,
        &mut rng::stream(cfg.seed, &[tag::SELECT, 1]),
    );
    let fill = cfg.cleanup.fill;
    for &i in &picked {
        for &(r, c) in comps[i].pixels() {
            canvas.set(r, c, fill);
        }
    }
    for (ord, &i) in picked.iter().enumerate() {
        records.push(place_region(canvas, &comps[i], ord, cfg));
    }
}

fn place_region(
    canvas: &mut LabelMap,
    region: &Region,
    ord: usize,
    cfg: &MorpConfig,
) -> EditRecord {
    let p = &cfg.placement;
    let class = region.class();
    let mut rng = rng::stream(cfg.seed, &[tag::PLACE, ord as u64]);
    let apex = cfg.apex_params(class);
    let edit = cfg.edit_params(class).expect("validated target class");
    let pad = headroom(cfg);
    let (w, h) = (canvas.width(), canvas.height());
    let mut rec = EditRecord::new(Stage::Placement, ord, class, region.area());

    let mut last: Option<Shape> = None;
    for attempt in 1..=p.max_paste_retries {
        let theta = rng.random_range(p.angle_range[0]..p.angle_range[1]);
        let (dx, dy) = sample_shift(p.max_shift, &mut rng);
        let rotated = rotate_no_crop(region, theta, pad);
        let (bulged, bulges) = flat_aware_bulges(&rotated.region, &apex, &p.flat, edit, &mut rng);
        let shape = Shape {
            region: bulged,
            origin: rotated.origin,
        };
        let moved = shape.translated(dy, dx);
        rec.placement = Some(PlacementRecord {
            theta,
            shift: [dx, dy],
            attempts: attempt,
            outcome: PlacementOutcome::Accepted,
            restored_px: None,
        });
        rec.flat_bulges = bulges;
        if moved.fits(w, h) {
            let target = moved.clip_to_canvas(w, h).expect("shape fits");
            if try_paste(canvas, &target, &p.forbid, &p.allow) {
                return rec;
            }
        }
        last = Some(shape);
    }

    let shape = last.expect("at least one attempt");
    let written = restore_near_origin(canvas, &shape, region.centroid(), cfg.cleanup.fill);
    if let Some(pr) = rec.placement.as_mut() {
        pr.outcome = PlacementOutcome::Restored;
        pr.restored_px = Some(written);
    }
    rec
}

fn apex_stage(canvas: &mut LabelMap, cfg: &MorpConfig, records: &mut Vec<EditRecord>) {
    let comps = target_components(canvas, cfg);
    if comps.is_empty() {
        return;
    }
    let sel = &cfg.selection;
    let mut picked = select_regions(
        &comps,
        sel.n_regions,
        sel.mode,
        false,
        &mut rng::stream(cfg.seed, &[tag::SELECT, 2]),
    );

    let mut forced = None;
    if sel.target_classes.contains(&ClassId::Oil) {
        let largest = comps
            .iter()
            .enumerate()
            .filter(|(_, r)| r.class() == ClassId::Oil)
            .max_by(|a, b| a.1.area().cmp(&b.1.area()).then(b.0.cmp(&a.0)));
        if let Some((i, r)) = largest {
            if r.area() as f64 / canvas.len() as f64 >= sel.large_oil_fraction {
                forced = Some(i);
                if !picked.contains(&i) {
                    if picked.len() < sel.n_regions {
                        picked.push(i);
                    } else if let Some(last) = picked.last_mut() {
                        *last = i;
                    }
                }
            }
        }
    }

    for (ord, &i) in picked.iter().enumerate() {
        let class = comps[i].class();
        // earlier edits may have touched this region
        let current: Vec<(usize, usize)> = comps[i]
            .pixels()
            .iter()
            .copied()
            .filter(|&(r, c)| canvas.get(r, c) == class)
            .collect();
        let mut rec = EditRecord::new(Stage::Apex, ord, class, current.len());
        rec.forced = forced == Some(i);
        let region = match Region::from_pixels(class, current) {
            Some(r) if r.area() >= cfg.cleanup.min_px => r,
            _ => {
                rec.note = Some("region below min_px".into());
                records.push(rec);
                continue;
            }
        };
        edit_region(canvas, &region, ord, cfg, &mut rec);
        *canvas = cleanup(canvas, cfg);
        records.push(rec);
    }
}

fn edit_region(
    canvas: &mut LabelMap,
    region: &Region,
    ord: usize,
    cfg: &MorpConfig,
    rec: &mut EditRecord,
) {
    let class = region.class();
    let mut rng = rng::stream(cfg.seed, &[tag::EDIT, ord as u64]);
    let apex = cfg.apex_params(class);
    let edit = cfg.edit_params(class).expect("validated target class");
    let chosen = match find_apices(region, &apex, &mut rng) {
        Ok((candidates, chosen)) => {
            rec.candidates = candidates.len();
            chosen
        }
        Err(e) => {
            rec.error = Some(e.to_string());
            return;
        }
    };
    if chosen.is_empty() {
        rec.note = Some("no apex".into());
        return;
    }
    let multi = apex_edit_multi(region, &chosen, edit, apex.curvature.eps, &mut rng);
    rec.apices = multi.records.clone();

    let (w, h) = (canvas.width() as isize, canvas.height() as isize);
    let allow = &cfg.placement.allow;
    let mut written: Vec<(usize, usize)> = Vec::new();
    for &(r, c) in &multi.add {
        if r < 0 || c < 0 || r >= h || c >= w {
            continue;
        }
        let (r, c) = (r as usize, c as usize);
        let cur = canvas.get(r, c);
        if cur != class && allow.contains(&cur) {
            canvas.set(r, c, class);
            written.push((r, c));
        }
    }
    for &(r, c) in &multi.wedges {
        if r < 0 || c < 0 || r >= h || c >= w {
            continue;
        }
        if region.contains(r, c) || written.binary_search(&(r as usize, c as usize)).is_ok() {
            canvas.set(r as usize, c as usize, cfg.cleanup.fill);
        }
    }
}
