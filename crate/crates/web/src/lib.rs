//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Masks cross the boundary as row-major class-index bytes (0 sea .. 4 land).

use morp::engine::{augment, find_apices, Stages};
use morp::geometry::{distance_transform, BinaryGrid};
use morp::labelmap::connected_components;
use morp::{rng, ClassId, Connectivity, LabelMap, MorpConfig};
use rand::Rng;
use wasm_bindgen::prelude::*;

const SPILL: [ClassId; 2] = [ClassId::Oil, ClassId::LookAlike];

fn label_map(classes: &[u8], width: usize, height: usize) -> Result<LabelMap, String> {
    if classes.len() != width * height {
        return Err(format!(
            "{} bytes for a {width}x{height} mask",
            classes.len()
        ));
    }
    LabelMap::from_raw(width, height, classes).map_err(|e| e.to_string())
}

fn fill_blob(
    map: &mut LabelMap,
    class: ClassId,
    cy: f64,
    cx: f64,
    ry: f64,
    rx: f64,
    wobble: f64,
    freq: f64,
) {
    for r in 0..map.height() {
        for c in 0..map.width() {
            let (dy, dx) = (r as f64 - cy, c as f64 - cx);
            let lim = 1.0 + wobble * (freq * dy.atan2(dx)).sin();
            let (u, v) = (dx / rx, dy / ry);
            if u * u + v * v <= lim * lim && map.get(r, c) == ClassId::Sea {
                map.set(r, c, class);
            }
        }
    }
}

/// Square synthetic mask: wavy coast on the left, oil and look-alike blobs,
/// a couple of ships.
pub fn synthetic_mask(size: usize, seed: u64) -> LabelMap {
    let size = size.max(32);
    let s = size as f64;
    let mut rng = rng::stream(seed, &[]);
    let mut map = LabelMap::filled(size, size, ClassId::Sea);
    let coast = rng.random_range(0.05..0.15) * s;
    let amp = rng.random_range(0.01..0.05) * s;
    let freq = rng.random_range(1.0..3.0);
    for r in 0..size {
        let edge = coast + amp * (freq * std::f64::consts::TAU * r as f64 / s).sin();
        for c in 0..size {
            if (c as f64) < edge {
                map.set(r, c, ClassId::Land);
            }
        }
    }
    let blobs = [(ClassId::Oil, 3), (ClassId::LookAlike, 1)];
    for (class, n) in blobs {
        for _ in 0..n {
            let cy = rng.random_range(0.2..0.8) * s;
            let cx = rng.random_range(0.35..0.8) * s;
            let ry = rng.random_range(0.05..0.12) * s;
            let rx = rng.random_range(0.05..0.18) * s;
            let wobble = rng.random_range(0.1..0.3);
            let freq = rng.random_range(2..6) as f64;
            fill_blob(&mut map, class, cy, cx, ry, rx, wobble, freq);
        }
    }
    for _ in 0..2 {
        let (r0, c0) = (
            rng.random_range(0..size - 3),
            rng.random_range(size / 3..size - 6),
        );
        for r in r0..r0 + 2 {
            for c in c0..c0 + 5 {
                if map.get(r, c) == ClassId::Sea {
                    map.set(r, c, ClassId::Ship);
                }
            }
        }
    }
    map
}

/// Runs the full augmentation pipeline with the preset configuration.
pub fn augment_classes(
    classes: &[u8],
    width: usize,
    height: usize,
    seed: u64,
    full: bool,
) -> Result<Vec<u8>, String> {
    let map = label_map(classes, width, height)?;
    let stages = if full {
        Stages::Full
    } else {
        Stages::PlacementOnly
    };
    Ok(augment(&map, &MorpConfig::preset(seed), stages)
        .result
        .to_raw())
}

/// Apex candidates of every spill region as `[x, y, chosen]` triples, where
/// `chosen` is 1 for the apices kept by k-means spreading.
pub fn apex_triples(classes: &[u8], width: usize, height: usize) -> Result<Vec<f64>, String> {
    let map = label_map(classes, width, height)?;
    let cfg = MorpConfig::preset(0);
    let mut rng = rng::stream(0, &[rng::tag::EDIT]);
    let mut out = Vec::new();
    for class in SPILL {
        let params = cfg.apex_params(class);
        for region in connected_components(&map, class, Connectivity::Eight) {
            let Ok((candidates, chosen)) = find_apices(&region, &params, &mut rng) else {
                continue;
            };
            for a in candidates {
                let kept = chosen.iter().any(|c| c.index == a.index);
                out.extend([a.point[0], a.point[1], if kept { 1.0 } else { 0.0 }]);
            }
        }
    }
    Ok(out)
}

/// RGBA image of the Euclidean distance to the nearest spill pixel, spill
/// pixels in their palette colour.
pub fn distance_image(classes: &[u8], width: usize, height: usize) -> Result<Vec<u8>, String> {
    let map = label_map(classes, width, height)?;
    let mut grid = BinaryGrid::new(width, height);
    for (cell, c) in grid.cells.iter_mut().zip(map.classes()) {
        *cell = SPILL.contains(c);
    }
    let field = distance_transform(&grid).map_err(|e| e.to_string())?;
    let scale = 255.0 / (width.max(height) as f64 / 4.0);
    let mut out = Vec::with_capacity(4 * map.len());
    for (i, c) in map.classes().iter().enumerate() {
        if SPILL.contains(c) {
            out.extend(c.color());
        } else {
            let v = 255.0 - (field.values[i] * scale).min(255.0);
            out.extend([v as u8; 3]);
        }
        out.push(255);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = sampleMask)]
pub fn sample_mask(size: usize, seed: u64) -> Vec<u8> {
    synthetic_mask(size, seed).to_raw()
}

#[wasm_bindgen(js_name = augmentMask)]
pub fn augment_mask(
    classes: &[u8],
    width: usize,
    height: usize,
    seed: u64,
    full: bool,
) -> Result<Vec<u8>, JsError> {
    augment_classes(classes, width, height, seed, full).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = apexPoints)]
pub fn apex_points(classes: &[u8], width: usize, height: usize) -> Result<Vec<f64>, JsError> {
    apex_triples(classes, width, height).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = distanceField)]
pub fn distance_field(classes: &[u8], width: usize, height: usize) -> Result<Vec<u8>, JsError> {
    distance_image(classes, width, height).map_err(|e| JsError::new(&e))
}

/// Palette RGBA for a class-index mask; unknown indices render magenta.
#[wasm_bindgen(js_name = toRgba)]
pub fn to_rgba(classes: &[u8]) -> Vec<u8> {
    classes
        .iter()
        .flat_map(|&v| {
            let [r, g, b] = ClassId::from_u8(v).map_or([255, 0, 255], ClassId::color);
            [r, g, b, 255]
        })
        .collect()
}
