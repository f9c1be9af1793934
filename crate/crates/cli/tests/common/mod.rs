#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use morp::mask_io::encode_intensity16;
use morp::{encode_mask, ClassId, LabelMap, MaskFormat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn morp_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_morp"))
}

pub fn run(args: &[&str]) -> Output {
    let out = morp_bin().args(args).output().expect("binary runs");
    if std::env::var_os("MORP_TEST_VERBOSE").is_some() {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn ellipse(
    map: &mut LabelMap,
    class: ClassId,
    cy: f64,
    cx: f64,
    ry: f64,
    rx: f64,
    phi: f64,
    rng: &mut ChaCha8Rng,
    allow: &[ClassId],
) {
    let (s, c) = phi.sin_cos();
    let r = ry.max(rx).ceil() as isize + 2;
    let wobble: f64 = rng.random_range(0.0..0.25);
    let freq = rng.random_range(2..6) as f64;
    for dy in -r..=r {
        for dx in -r..=r {
            let (y, x) = (cy as isize + dy, cx as isize + dx);
            if y < 0 || x < 0 || y >= map.height() as isize || x >= map.width() as isize {
                continue;
            }
            let (fy, fx) = (dy as f64, dx as f64);
            let u = (c * fx + s * fy) / rx;
            let v = (-s * fx + c * fy) / ry;
            let ang = fy.atan2(fx);
            let lim = 1.0 + wobble * (freq * ang).sin();
            if u * u + v * v <= lim * lim && allow.contains(&map.get(y as usize, x as usize)) {
                map.set(y as usize, x as usize, class);
            }
        }
    }
}

/// Coastline on the left, a few noisy oil and look-alike blobs and ships.
pub fn synthetic_mask(width: usize, height: usize, seed: u64) -> LabelMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = LabelMap::filled(width, height, ClassId::Sea);
    let coast = rng.random_range(0.0..0.2) * width as f64;
    let amp = rng.random_range(0.0..0.06) * width as f64;
    let freq = rng.random_range(1.0..4.0);
    for r in 0..height {
        let edge = coast + amp * (freq * r as f64 / height as f64 * std::f64::consts::TAU).sin();
        for c in 0..width {
            if (c as f64) < edge {
                map.set(r, c, ClassId::Land);
            }
        }
    }
    let scale = width.min(height) as f64;
    let sea = [ClassId::Sea];
    for _ in 0..rng.random_range(1..4) {
        let (cy, cx) = (
            rng.random_range(0.1..0.9) * height as f64,
            rng.random_range(0.25..0.9) * width as f64,
        );
        let (ry, rx) = (
            rng.random_range(0.03..0.12) * scale,
            rng.random_range(0.03..0.2) * scale,
        );
        let phi = rng.random_range(0.0..std::f64::consts::PI);
        ellipse(&mut map, ClassId::Oil, cy, cx, ry, rx, phi, &mut rng, &sea);
    }
    for _ in 0..rng.random_range(0..3) {
        let (cy, cx) = (
            rng.random_range(0.1..0.9) * height as f64,
            rng.random_range(0.25..0.9) * width as f64,
        );
        let (ry, rx) = (
            rng.random_range(0.02..0.08) * scale,
            rng.random_range(0.02..0.12) * scale,
        );
        let phi = rng.random_range(0.0..std::f64::consts::PI);
        ellipse(
            &mut map,
            ClassId::LookAlike,
            cy,
            cx,
            ry,
            rx,
            phi,
            &mut rng,
            &sea,
        );
    }
    for _ in 0..rng.random_range(0..4) {
        let (r0, c0) = (
            rng.random_range(0..height - 4),
            rng.random_range(0..width - 6),
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

pub fn write_masks(dir: &Path, n: usize, size: usize, seed: u64) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let m = synthetic_mask(size, size, seed.wrapping_add(i as u64));
        std::fs::write(
            dir.join(format!("mask_{i:04}.png")),
            encode_mask(&m, MaskFormat::Indexed),
        )
        .unwrap();
    }
}

/// Writes `scene_<id>.png` (16-bit speckled intensity, darker over oil) and
/// `scene_<id>_mask.png`.
pub fn write_scene(dir: &Path, id: &str, width: usize, height: usize, seed: u64) -> LabelMap {
    std::fs::create_dir_all(dir).unwrap();
    let labels = synthetic_mask(width, height, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    let values: Vec<f64> = labels
        .classes()
        .iter()
        .map(|c| {
            let base = match c {
                ClassId::Oil => 0.15,
                ClassId::LookAlike => 0.25,
                ClassId::Ship => 0.95,
                ClassId::Land => 0.7,
                ClassId::Sea => 0.5,
            };
            (base + rng.random_range(-0.1..0.1f64)).clamp(0.0, 1.0)
        })
        .collect();
    std::fs::write(
        dir.join(format!("scene_{id}.png")),
        encode_intensity16(width, height, &values),
    )
    .unwrap();
    std::fs::write(
        dir.join(format!("scene_{id}_mask.png")),
        encode_mask(&labels, MaskFormat::Indexed),
    )
    .unwrap();
    labels
}

/// Relative path -> contents of every file under `root`.
pub fn tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

pub fn manifest_fixture() -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/scenes_manifest.csv"),
    )
    .unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
