//! Apex discovery and bulge / wedge edits.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ApexParams, EditParams, FlatConfig};
use crate::error::GeometryError;
use crate::geometry::{
    curvature_profile, detect_apices, fan_directions, inward_support, outward_normal,
    rasterize_fan_polygon, region_distance_field, select_apices_kmeans, trace_outer_contour, Apex,
    DistanceField,
};
use crate::labelmap::Region;

/// Padding of the distance field around a region; two pixels suffice for
/// central differences at the boundary.
const FIELD_PAD: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditMode {
    Expand,
    Shrink,
}

/// Lengths computed for one ray of a fan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayRecord {
    pub d_in: f64,
    pub xi: u8,
    pub d_target: f64,
    pub d_out: f64,
    pub eased: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApexRecord {
    pub index: usize,
    /// `[x, y]`.
    pub point: [f64; 2],
    pub mode: EditMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normal: Option<[f64; 2]>,
    pub rays: Vec<RayRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// One apex edit. `raster` is the full fan; `add` is the bulge (the fan, in
/// expand mode) and `remove` the wedge (fan within the region, in shrink mode).
#[derive(Clone, Debug, PartialEq)]
pub struct ApexEdit {
    pub record: ApexRecord,
    pub raster: Vec<(isize, isize)>,
    pub add: Vec<(isize, isize)>,
    pub remove: Vec<(isize, isize)>,
}

/// Target and output length of a ray with inward support `d_in`:
/// `d_target = floor(scale * d_in + xi)`; when `d_target >= r_max` the
/// output is eased to `floor(r_max * (0.7 + 0.3 u))`.
///
/// Returns `(d_target, d_out, eased)`.
pub fn ray_length(d_in: f64, scale: f64, r_max: f64, xi: u8, u: f64) -> (f64, f64, bool) {
    let d_target = (scale * d_in + xi as f64).floor();
    if d_target >= r_max {
        (d_target, (r_max * (0.7 + 0.3 * u)).floor(), true)
    } else {
        (d_target, d_target, false)
    }
}

fn draw_ray<R: Rng + ?Sized>(d_in: f64, scale: f64, r_max: f64, rng: &mut R) -> RayRecord {
    let xi: u8 = rng.random_range(0..=1);
    let d_target = (scale * d_in + xi as f64).floor();
    let (d_out, eased) = if d_target >= r_max {
        let u: f64 = rng.random();
        (ray_length(d_in, scale, r_max, xi, u).1, true)
    } else {
        (d_target, false)
    };
    RayRecord {
        d_in,
        xi,
        d_target,
        d_out,
        eased,
    }
}

/// Bulge (expand) or wedge (shrink) at apex `a` of `region`.
///
/// The mode is drawn as Bernoulli(`p_expand`) unless `force` is given. An
/// expand fan opens around the outward normal and each ray's inward support
/// is measured against it; a shrink fan opens around the inward normal and
/// the support is measured along the ray itself.
pub fn apex_edit_single<R: Rng + ?Sized>(
    region: &Region,
    field: &DistanceField,
    a: Apex,
    params: &EditParams,
    eps: f64,
    force: Option<EditMode>,
    rng: &mut R,
) -> Result<ApexEdit, GeometryError> {
    let mode = force.unwrap_or_else(|| {
        if rng.random_bool(params.p_expand) {
            EditMode::Expand
        } else {
            EditMode::Shrink
        }
    });
    let n = outward_normal(field, a.point, region, eps)?;
    let (axis, scale, r_max) = match mode {
        EditMode::Expand => (n, params.s_expand, params.r_max_expand),
        EditMode::Shrink => ([-n[0], -n[1]], params.s_shrink, params.r_max_shrink),
    };
    let dirs = fan_directions(axis, params.half_angle, params.n_rays);
    let rays: Vec<RayRecord> = dirs
        .iter()
        .map(|u| {
            let d_in = match mode {
                EditMode::Expand => inward_support(region, a.point, *u),
                EditMode::Shrink => inward_support(region, a.point, [-u[0], -u[1]]),
            };
            draw_ray(d_in, scale, r_max, rng)
        })
        .collect();
    let lengths: Vec<f64> = rays.iter().map(|r| r.d_out).collect();
    let raster = rasterize_fan_polygon(a.point, &dirs, &lengths).raster;
    let (add, remove) = match mode {
        EditMode::Expand => (raster.clone(), Vec::new()),
        EditMode::Shrink => (
            Vec::new(),
            raster
                .iter()
                .copied()
                .filter(|&(r, c)| region.contains(r, c))
                .collect(),
        ),
    };
    Ok(ApexEdit {
        record: ApexRecord {
            index: a.index,
            point: a.point,
            mode,
            normal: Some(n),
            rays,
            skipped: None,
        },
        raster,
        add,
        remove,
    })
}

/// Union of all bulges and all wedges of a set of apex edits.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MultiEdit {
    pub add: BTreeSet<(isize, isize)>,
    /// Wedge rasters, unrestricted.
    pub wedges: BTreeSet<(isize, isize)>,
    pub records: Vec<ApexRecord>,
}

impl MultiEdit {
    /// `(R ∪ B) \ S` as a pixel set.
    pub fn compose(&self, region: &Region) -> BTreeSet<(isize, isize)> {
        region
            .pixels()
            .iter()
            .map(|&(r, c)| (r as isize, c as isize))
            .chain(self.add.iter().copied())
            .filter(|p| !self.wedges.contains(p))
            .collect()
    }
}

/// Edits every apex independently (own mode draw per apex) and collects the
/// unions. Apices without a usable normal are recorded and skipped.
pub fn apex_edit_multi<R: Rng + ?Sized>(
    region: &Region,
    apices: &[Apex],
    params: &EditParams,
    eps: f64,
    rng: &mut R,
) -> MultiEdit {
    let field = region_distance_field(region, FIELD_PAD);
    let mut out = MultiEdit::default();
    for &a in apices {
        match apex_edit_single(region, &field, a, params, eps, None, rng) {
            Ok(edit) => {
                out.add.extend(edit.add);
                if edit.record.mode == EditMode::Shrink {
                    out.wedges.extend(edit.raster);
                }
                out.records.push(edit.record);
            }
            Err(e) => out.records.push(ApexRecord {
                index: a.index,
                point: a.point,
                mode: EditMode::Expand,
                normal: None,
                rays: Vec::new(),
                skipped: Some(e.to_string()),
            }),
        }
    }
    out
}

/// Apex candidates of `region` and the spread-out subset chosen by k-means.
pub fn find_apices<R: Rng + ?Sized>(
    region: &Region,
    params: &ApexParams,
    rng: &mut R,
) -> Result<(Vec<Apex>, Vec<Apex>), GeometryError> {
    let contour = trace_outer_contour(region)?;
    let profile = curvature_profile(&contour, &params.curvature)?;
    let candidates: Vec<Apex> =
        detect_apices(&profile.kappa_plus, params.quantile, params.min_distance)
            .into_iter()
            .map(|i| Apex {
                index: i,
                point: contour.points()[i],
            })
            .collect();
    if candidates.is_empty() {
        return Ok((candidates, Vec::new()));
    }
    let (cr, cc) = region.centroid();
    let chosen = select_apices_kmeans(&candidates, params.apices_per_region, [cc, cr], rng);
    Ok((candidates, chosen))
}

/// Midpoints of the longest circular runs of at least `min_run` consecutive
/// contour points with `|kappa| < max_abs`, longest first, at most `max_runs`.
pub fn flat_run_midpoints(
    kappa: &[f64],
    min_run: usize,
    max_abs: f64,
    max_runs: usize,
) -> Vec<usize> {
    let n = kappa.len();
    let flat: Vec<bool> = kappa.iter().map(|k| k.abs() < max_abs).collect();
    let Some(start) = flat.iter().position(|f| !f) else {
        // the whole contour is flat: one run spanning it
        return if n >= min_run && max_runs > 0 {
            vec![n / 2]
        } else {
            Vec::new()
        };
    };
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut t = 0;
    while t < n {
        let i = (start + t) % n;
        if flat[i] {
            let run_start = i;
            let mut len = 0;
            while t < n && flat[(start + t) % n] {
                len += 1;
                t += 1;
            }
            runs.push((run_start, len));
        } else {
            t += 1;
        }
    }
    runs.retain(|&(_, len)| len >= min_run);
    runs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    runs.truncate(max_runs);
    runs.into_iter().map(|(s, len)| (s + len / 2) % n).collect()
}

/// Adds one expand-mode bulge at the middle of each long near-straight run of
/// the boundary. Pixels with negative coordinates are dropped, so callers
/// should give the region headroom.
pub fn flat_aware_bulges<R: Rng + ?Sized>(
    region: &Region,
    apex: &ApexParams,
    flat: &FlatConfig,
    params: &EditParams,
    rng: &mut R,
) -> (Region, Vec<ApexRecord>) {
    if !flat.enabled {
        return (region.clone(), Vec::new());
    }
    let Ok(contour) = trace_outer_contour(region) else {
        return (region.clone(), Vec::new());
    };
    let Ok(profile) = curvature_profile(&contour, &apex.curvature) else {
        return (region.clone(), Vec::new());
    };
    let mids = flat_run_midpoints(
        &profile.kappa,
        flat.min_run,
        flat.max_abs_curvature,
        flat.max_runs,
    );
    if mids.is_empty() {
        return (region.clone(), Vec::new());
    }
    let field = region_distance_field(region, FIELD_PAD);
    let mut pixels: Vec<(usize, usize)> = region.pixels().to_vec();
    let mut records = Vec::new();
    for i in mids {
        let a = Apex {
            index: i,
            point: contour.points()[i],
        };
        match apex_edit_single(
            region,
            &field,
            a,
            params,
            apex.curvature.eps,
            Some(EditMode::Expand),
            rng,
        ) {
            Ok(edit) => {
                pixels.extend(
                    edit.add
                        .iter()
                        .filter(|&&(r, c)| r >= 0 && c >= 0)
                        .map(|&(r, c)| (r as usize, c as usize)),
                );
                records.push(edit.record);
            }
            Err(e) => records.push(ApexRecord {
                index: i,
                point: a.point,
                mode: EditMode::Expand,
                normal: None,
                rays: Vec::new(),
                skipped: Some(e.to_string()),
            }),
        }
    }
    let out = Region::from_pixels(region.class(), pixels).expect("non-empty");
    (out, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::MorpConfig;
    use crate::labelmap::ClassId;
    use crate::rng;

    fn rect(h: usize, w: usize, r0: usize, c0: usize) -> Region {
        let px = (r0..r0 + h)
            .flat_map(|r| (c0..c0 + w).map(move |c| (r, c)))
            .collect();
        Region::from_pixels(ClassId::Oil, px).unwrap()
    }

    fn disk(radius: f64, center: f64) -> Region {
        let n = (2.0 * center) as usize + 1;
        let mut px = Vec::new();
        for r in 0..n {
            for c in 0..n {
                if (r as f64 - center).powi(2) + (c as f64 - center).powi(2) <= radius * radius {
                    px.push((r, c));
                }
            }
        }
        Region::from_pixels(ClassId::Oil, px).unwrap()
    }

    #[test]
    fn easing_interval() {
        for k in 0..=100 {
            let u = k as f64 / 100.0 * 0.999_999;
            let (t, out, eased) = ray_length(50.0, 1.0, 30.0, 0, u);
            assert_eq!(t, 50.0);
            assert!(eased);
            assert!((21.0..=30.0).contains(&out), "{out}");
        }
    }

    #[test]
    fn unit_scale_keeps_support() {
        let (t, out, eased) = ray_length(7.0, 1.0, 30.0, 0, 0.5);
        assert_eq!((t, out, eased), (7.0, 7.0, false));
    }

    #[test]
    fn shrink_stays_inside() {
        let r = rect(12, 30, 10, 10);
        let field = region_distance_field(&r, FIELD_PAD);
        let cfg = MorpConfig::preset(1);
        let mut g = rng::stream(3, &[]);
        let a = Apex {
            index: 0,
            point: [25.0, 10.0],
        };
        let e = apex_edit_single(
            &r,
            &field,
            a,
            &cfg.edit.oil,
            1e-6,
            Some(EditMode::Shrink),
            &mut g,
        )
        .unwrap();
        assert!(e.add.is_empty());
        assert!(!e.remove.is_empty());
        assert!(e.remove.iter().all(|&(y, x)| r.contains(y, x)));
    }

    #[test]
    fn expand_adds_outside() {
        let r = rect(12, 30, 10, 10);
        let field = region_distance_field(&r, FIELD_PAD);
        let cfg = MorpConfig::preset(1);
        let mut g = rng::stream(3, &[]);
        let a = Apex {
            index: 0,
            point: [25.0, 10.0],
        };
        let e = apex_edit_single(
            &r,
            &field,
            a,
            &cfg.edit.oil,
            1e-6,
            Some(EditMode::Expand),
            &mut g,
        )
        .unwrap();
        assert!(e.remove.is_empty());
        assert!(e.add.iter().any(|&(y, x)| !r.contains(y, x)));
        let n = e.record.normal.unwrap();
        assert!(
            (n[0] - 0.0).abs() < 1e-9 && (n[1] + 1.0).abs() < 1e-9,
            "{n:?}"
        );
    }

    #[test]
    fn wedge_wins_over_bulge() {
        let r = rect(3, 3, 5, 5);
        let mut m = MultiEdit::default();
        m.add.insert((4, 6));
        m.wedges.insert((4, 6));
        m.wedges.insert((5, 5));
        let out = m.compose(&r);
        assert!(!out.contains(&(4, 6)));
        assert!(!out.contains(&(5, 5)));
        assert_eq!(out.len(), 8);
    }

    #[test]
    fn all_shrink_is_subset() {
        let r = rect(14, 24, 20, 20);
        let mut cfg = MorpConfig::preset(1);
        cfg.edit.oil.p_expand = 0.0;
        let mut g = rng::stream(9, &[]);
        let apices = [
            Apex {
                index: 0,
                point: [20.0, 20.0],
            },
            Apex {
                index: 1,
                point: [43.0, 27.0],
            },
            Apex {
                index: 2,
                point: [30.0, 33.0],
            },
        ];
        let m = apex_edit_multi(&r, &apices, &cfg.edit.oil, 1e-6, &mut g);
        let out = m.compose(&r);
        assert!(out.len() < r.area());
        assert!(out.iter().all(|&(y, x)| r.contains(y, x)));
    }

    #[test]
    fn runs_wrap_around() {
        let mut k = vec![0.0; 20];
        for v in k.iter_mut().take(15).skip(5) {
            *v = 1.0;
        }
        // flat run: indices 15..20 and 0..5, length 10, midpoint 0
        assert_eq!(flat_run_midpoints(&k, 8, 0.5, 2), vec![0]);
        assert!(flat_run_midpoints(&k, 11, 0.5, 2).is_empty());
    }

    #[test]
    fn rectangle_gets_bulge() {
        let r = rect(4, 20, 10, 10);
        let cfg = MorpConfig::preset(1);
        let mut g = rng::stream(2, &[]);
        let (out, recs) = flat_aware_bulges(
            &r,
            &cfg.apex_params(ClassId::Oil),
            &cfg.placement.flat,
            &cfg.edit.oil,
            &mut g,
        );
        assert!(!recs.is_empty());
        assert!(out.area() > r.area());
        assert_eq!(out.class(), r.class());
    }

    #[test]
    fn disk_is_left_alone() {
        let d = disk(10.0, 14.0);
        let cfg = MorpConfig::preset(1);
        let mut g = rng::stream(2, &[]);
        let (out, recs) = flat_aware_bulges(
            &d,
            &cfg.apex_params(ClassId::Oil),
            &cfg.placement.flat,
            &cfg.edit.oil,
            &mut g,
        );
        assert!(recs.is_empty());
        assert_eq!(out, d);
    }
}
