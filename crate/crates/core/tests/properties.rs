use morp::config::MorpConfig;
use morp::engine::{augment, plan_batch, rigid_transform, JobKind, Regime, Stages};
use morp::geometry::{distance_transform, BinaryGrid};
use morp::labelmap::{class_histogram, connected_components, remove_small};
use morp::mask_io::{decode_mask, encode_mask, MaskFormat};
use morp::metrics::{cb_weights, confusion_counts, focal_tversky, iou, ProbMap, TverskyParams};
use morp::patches::{median_filter_3x3, percentile_normalize, window_starts, PercentileMethod};
use morp::{ClassId, Connectivity, LabelMap};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Land strip, a few disks of oil and look-alike, some ship specks.
fn blob_map(size: usize, seed: u64) -> LabelMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = LabelMap::filled(size, size, ClassId::Sea);
    let land = rng.random_range(0..size / 4);
    for r in 0..size {
        for c in 0..land + (r % 5) {
            m.set(r, c.min(size - 1), ClassId::Land);
        }
    }
    for _ in 0..rng.random_range(1..5) {
        let class = if rng.random_bool(0.6) {
            ClassId::Oil
        } else {
            ClassId::LookAlike
        };
        let (cy, cx) = (
            rng.random_range(0..size) as f64,
            rng.random_range(0..size) as f64,
        );
        let (ry, rx) = (
            rng.random_range(2.0..size as f64 / 4.0),
            rng.random_range(2.0..size as f64 / 4.0),
        );
        for r in 0..size {
            for c in 0..size {
                let (dy, dx) = ((r as f64 - cy) / ry, (c as f64 - cx) / rx);
                if dy * dy + dx * dx <= 1.0 && m.get(r, c) == ClassId::Sea {
                    m.set(r, c, class);
                }
            }
        }
    }
    for _ in 0..rng.random_range(0..4) {
        let (r, c) = (rng.random_range(0..size), rng.random_range(0..size));
        if m.get(r, c) == ClassId::Sea {
            m.set(r, c, ClassId::Ship);
        }
    }
    m
}

fn small_config(seed: u64) -> MorpConfig {
    let mut cfg = MorpConfig::preset(seed);
    cfg.placement.max_shift = 8.0;
    for p in [&mut cfg.edit.oil, &mut cfg.edit.lookalike] {
        p.r_max_expand = 8.0;
        p.r_max_shrink = 4.0;
    }
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn augmentation_conserves_protected_pixels(map_seed in any::<u64>(), seed in any::<u64>(), full in any::<bool>()) {
        let map = blob_map(48, map_seed);
        let cfg = small_config(seed);
        let stages = if full { Stages::Full } else { Stages::PlacementOnly };
        let out = augment(&map, &cfg, stages);
        let present = map.present_classes();
        for (a, b) in map.classes().iter().zip(out.result.classes()) {
            prop_assert_eq!(*a == ClassId::Land, *b == ClassId::Land);
            if cfg.placement.forbid.contains(a) {
                prop_assert_eq!(a, b);
            }
            prop_assert!(present.contains(b) || *b == cfg.cleanup.fill);
        }
        for &class in &cfg.selection.target_classes {
            for r in connected_components(&out.result, class, Connectivity::Eight) {
                prop_assert!(r.area() >= cfg.cleanup.min_px);
            }
        }
        prop_assert_eq!(&augment(&map, &cfg, stages).result, &out.result);
    }

    #[test]
    fn regime_plans_are_seed_stable(n in 1usize..60, mult in 1usize..4, seed in any::<u64>()) {
        let a = plan_batch(n, Regime::M50, mult, seed).unwrap();
        prop_assert_eq!(&a, &plan_batch(n, Regime::M50, mult, seed).unwrap());
        let full = a.iter().filter(|j| j.kind == JobKind::Full).count();
        prop_assert_eq!(full, n.div_ceil(2) * mult);
        prop_assert_eq!(a.len(), n * mult);
    }

    #[test]
    fn translation_preserves_area(map_seed in any::<u64>(), dr in -6isize..6, dc in -6isize..6) {
        let map = blob_map(40, map_seed);
        let regions = connected_components(&map, ClassId::Oil, Connectivity::Eight);
        prop_assume!(!regions.is_empty());
        let r = &regions[0];
        let b = r.bbox();
        let inside = |lo: usize, hi: usize, d: isize| lo as isize + d >= 0 && hi as isize + d < 40;
        prop_assume!(inside(b.min_row, b.max_row, dr) && inside(b.min_col, b.max_col, dc));
        if let Ok(moved) = rigid_transform(r, 0.0, (dc, dr), 40, 40) {
            prop_assert_eq!(moved.area(), r.area());
            let (y0, x0) = r.centroid();
            let (y1, x1) = moved.centroid();
            prop_assert!((y1 - y0 - dr as f64).abs() < 1e-9 && (x1 - x0 - dc as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn distance_transform_matches_brute_force(w in 1usize..14, h in 1usize..14, bits in prop::collection::vec(any::<bool>(), 196)) {
        let mut g = BinaryGrid::new(w, h);
        g.cells.copy_from_slice(&bits[..w * h]);
        prop_assume!(g.cells.iter().any(|&b| b));
        let f = distance_transform(&g).unwrap();
        for r in 0..h {
            for c in 0..w {
                let mut best = u64::MAX;
                for rr in 0..h {
                    for cc in 0..w {
                        if g.get(rr, cc) {
                            let d = (r.abs_diff(rr).pow(2) + c.abs_diff(cc).pow(2)) as u64;
                            best = best.min(d);
                        }
                    }
                }
                prop_assert_eq!(f.local(r, c), (best as f64).sqrt());
            }
        }
    }

    #[test]
    fn masks_roundtrip_through_png(map_seed in any::<u64>(), rgb in any::<bool>()) {
        let map = blob_map(24, map_seed);
        let fmt = if rgb { MaskFormat::PaletteRgb } else { MaskFormat::Indexed };
        prop_assert_eq!(decode_mask(&encode_mask(&map, fmt), fmt).unwrap(), map);
    }

    #[test]
    fn remove_small_is_idempotent(map_seed in any::<u64>(), min_px in 1usize..40) {
        let map = blob_map(32, map_seed);
        let classes = [ClassId::Oil, ClassId::LookAlike];
        let once = remove_small(&map, min_px, &classes, ClassId::Sea, Connectivity::Eight);
        let twice = remove_small(&once, min_px, &classes, ClassId::Sea, Connectivity::Eight);
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(class_histogram(&once)[4], class_histogram(&map)[4]);
    }

    #[test]
    fn iou_is_symmetric_and_bounded(a in any::<u64>(), b in any::<u64>()) {
        let (p, t) = (blob_map(20, a), blob_map(20, b));
        let fwd = iou(&confusion_counts(&p, &t).unwrap());
        let back = iou(&confusion_counts(&t, &p).unwrap());
        for (x, y) in fwd.per_class.iter().zip(&back.per_class) {
            prop_assert!((0.0..=1.0).contains(x));
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn focal_tversky_ignores_pixel_order(seed in any::<u64>()) {
        let truth = blob_map(12, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let n = truth.len();
        let mut data = Vec::with_capacity(5 * n);
        for _ in 0..n {
            let raw: Vec<f64> = (0..5).map(|_| rng.random_range(0.01..1.0)).collect();
            let s: f64 = raw.iter().sum();
            data.extend(raw.iter().map(|v| v / s));
        }
        let prob = ProbMap::new(12, 12, data.clone()).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.reverse();
        let pdata: Vec<f64> = perm.iter().flat_map(|&i| data[5 * i..5 * i + 5].to_vec()).collect();
        let ptruth = LabelMap::from_classes(12, 12, perm.iter().map(|&i| truth.classes()[i]).collect()).unwrap();
        let params = TverskyParams::default();
        let a = focal_tversky(&prob, &truth, &params).unwrap();
        let b = focal_tversky(&ProbMap::new(12, 12, pdata).unwrap(), &ptruth, &params).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn class_weights_decrease_with_frequency(counts in prop::array::uniform5(1u64..100_000)) {
        let w = cb_weights(&counts).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if counts[i] < counts[j] {
                    prop_assert!(w.raw[i] >= w.raw[j]);
                }
            }
        }
        let mean = w.normalized.iter().sum::<f64>() / 5.0;
        prop_assert!((mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn percentile_normalization_is_monotone(values in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        prop_assume!(values.iter().any(|v| *v != values[0]));
        for method in [PercentileMethod::NearestRank, PercentileMethod::Linear] {
            // Err: clipping range collapsed to a point
            if let Ok(out) = percentile_normalize(&values, 0.5, 97.5, method) {
                    for (i, j) in (0..values.len()).flat_map(|i| (0..values.len()).map(move |j| (i, j))) {
                        prop_assert!((0.0..=1.0).contains(&out[i]));
                        if values[i] <= values[j] {
                            prop_assert!(out[i] <= out[j]);
                        }
                    }
            }
        }
    }

    #[test]
    fn median_stays_within_neighbourhood(w in 3usize..10, h in 3usize..10, vals in prop::collection::vec(0u8..20, 100)) {
        let v: Vec<f64> = vals[..w * h].iter().map(|&x| x as f64).collect();
        let out = median_filter_3x3(&v, w, h).unwrap();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for x in &out {
            prop_assert!(*x >= lo && *x <= hi);
        }
        let flat = vec![3.5; w * h];
        prop_assert_eq!(median_filter_3x3(&flat, w, h).unwrap(), flat);
    }

    #[test]
    fn window_starts_cover_the_axis(len in 1usize..3000, window in 1usize..600, stride in 1usize..600) {
        prop_assume!(window <= len);
        let s = window_starts(len, window, stride);
        prop_assert_eq!(s[0], 0);
        prop_assert_eq!(*s.last().unwrap() + window, len);
        for pair in s.windows(2) {
            prop_assert!(pair[0] < pair[1] && pair[1] - pair[0] <= stride);
        }
    }
}
