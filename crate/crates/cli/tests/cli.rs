mod common;

use common::*;
use morp::metrics::ProbMap;
use morp::patches::{parse_manifest, split_manifest, Split};
use morp::{encode_mask, ClassId, LabelMap, MaskFormat};
use tempfile::tempdir;

#[test]
fn nomove_outputs_are_byte_equal() {
    let dir = tempdir().unwrap();
    let (input, output) = (dir.path().join("in"), dir.path().join("out"));
    write_masks(&input, 4, 64, 1);
    let out = run(&[
        "augment",
        "--seed",
        "3",
        "--regime",
        "nomove",
        "--input",
        s(&input),
        "--output",
        s(&output),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for i in 0..4 {
        let name = format!("mask_{i:04}.png");
        assert_eq!(
            std::fs::read(input.join(&name)).unwrap(),
            std::fs::read(output.join(&name)).unwrap()
        );
    }
    let records = std::fs::read_to_string(output.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 4);
}

#[test]
fn augment_is_independent_of_worker_count() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("in");
    write_masks(&input, 6, 96, 10);
    let mut trees = Vec::new();
    for jobs in ["1", "8"] {
        let output = dir.path().join(format!("out{jobs}"));
        let out = run(&[
            "augment",
            "--seed",
            "42",
            "--jobs",
            jobs,
            "--multiplier",
            "2",
            "--input",
            s(&input),
            "--output",
            s(&output),
        ]);
        assert!(
            matches!(code(&out), 0 | 2),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        trees.push(tree(&output));
    }
    assert_eq!(trees[0].len(), 13);
    assert_eq!(trees[0], trees[1]);
}

#[test]
fn augment_changes_masks_and_keeps_land() {
    let dir = tempdir().unwrap();
    let (input, output) = (dir.path().join("in"), dir.path().join("out"));
    write_masks(&input, 3, 96, 20);
    let out = run(&[
        "augment",
        "--seed",
        "5",
        "--input",
        s(&input),
        "--output",
        s(&output),
    ]);
    assert!(matches!(code(&out), 0 | 2));
    let mut changed = 0;
    for i in 0..3 {
        let name = format!("mask_{i:04}.png");
        let a = morp::decode_mask(
            &std::fs::read(input.join(&name)).unwrap(),
            MaskFormat::Indexed,
        )
        .unwrap();
        let b = morp::decode_mask(
            &std::fs::read(output.join(&name)).unwrap(),
            MaskFormat::Indexed,
        )
        .unwrap();
        for (x, y) in a.classes().iter().zip(b.classes()) {
            assert_eq!(*x == ClassId::Land, *y == ClassId::Land);
        }
        changed += (a != b) as usize;
    }
    assert!(changed > 0);
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("in");
    write_masks(&input, 1, 32, 0);
    let out = run(&[
        "augment",
        "--input",
        s(&input),
        "--output",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn bad_config_and_flags_exit_1() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "seed = 1\n[run]\nregme = \"m00\"\n").unwrap();
    let out = run(&[
        "--config",
        s(&cfg),
        "augment",
        "--input",
        "x",
        "--output",
        "y",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("regme"));
    assert_eq!(code(&run(&["augment", "--bogus"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn dry_run_prints_resolved_config_and_writes_nothing() {
    let dir = tempdir().unwrap();
    let output = dir.path().join("never");
    let out = run(&[
        "--dry-run",
        "--seed",
        "9",
        "augment",
        "--input",
        "missing",
        "--output",
        s(&output),
    ]);
    assert_eq!(code(&out), 0);
    assert!(!output.exists());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 9"));
    assert!(text.contains("[placement]"));
    // the printed document is itself a valid config
    let cfg = dir.path().join("resolved.toml");
    std::fs::write(&cfg, &text).unwrap();
    let again = run(&[
        "--dry-run",
        "--config",
        s(&cfg),
        "augment",
        "--input",
        "a",
        "--output",
        "b",
    ]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn metrics_identical_dirs_give_full_iou() {
    let dir = tempdir().unwrap();
    let masks = dir.path().join("m");
    write_masks(&masks, 2, 40, 7);
    let report = dir.path().join("report.tsv");
    let out = run(&[
        "metrics",
        "--pred",
        s(&masks),
        "--truth",
        s(&masks),
        "--out",
        s(&report),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("name\tmIoU"));
    for l in &lines[1..] {
        let cols: Vec<&str> = l.split('\t').collect();
        for v in &cols[1..7] {
            assert_eq!(*v, "100.00", "{l}");
        }
        assert_eq!(cols[8], "0.0000");
    }
    assert!(lines[3].starts_with("ALL\t"));
}

#[test]
fn metrics_row_matches_known_confusion() {
    let dir = tempdir().unwrap();
    let (p, t) = (dir.path().join("p"), dir.path().join("t"));
    std::fs::create_dir_all(&p).unwrap();
    std::fs::create_dir_all(&t).unwrap();
    // truth: 10x10 sea with a 4x5 oil block; prediction shifts it one column
    let mut truth = LabelMap::filled(10, 10, ClassId::Sea);
    let mut pred = truth.clone();
    for r in 2..6 {
        for c in 2..7 {
            truth.set(r, c, ClassId::Oil);
            pred.set(r, c + 1, ClassId::Oil);
        }
    }
    std::fs::write(p.join("a.png"), encode_mask(&pred, MaskFormat::Indexed)).unwrap();
    std::fs::write(t.join("a.png"), encode_mask(&truth, MaskFormat::Indexed)).unwrap();
    let out = run(&[
        "metrics",
        "--pred",
        s(&p),
        "--truth",
        s(&t),
        "--pixel-spacing",
        "10",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split('\t').collect();
    // oil: tp 16, fp 4, fn 4 -> 16/24; sea: tp 76, fp 4, fn 4 -> 76/84
    assert_eq!(row[3], format!("{:.2}", 100.0 * 16.0 / 24.0));
    assert_eq!(row[2], format!("{:.2}", 100.0 * 76.0 / 84.0));
    assert_eq!(row[7], "0.0020");
    assert_eq!(row[8], "0.0004");
}

#[test]
fn metrics_names_unpaired_file() {
    let dir = tempdir().unwrap();
    let (p, t) = (dir.path().join("p"), dir.path().join("t"));
    write_masks(&p, 2, 16, 0);
    write_masks(&t, 1, 16, 0);
    let out = run(&["metrics", "--pred", s(&p), "--truth", s(&t)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("mask_0001.png"));
}

#[test]
fn manifest_fixture_splits() {
    let rows = parse_manifest(&manifest_fixture()).unwrap();
    assert_eq!(rows.len(), 40);
    let m = split_manifest(rows).unwrap();
    let test: Vec<&str> = m
        .rows
        .iter()
        .filter(|r| r.split == Split::Test)
        .map(|r| r.img.as_str())
        .collect();
    assert_eq!(test, ["14", "17", "18", "19", "21", "25", "26", "28"]);
    assert_eq!(m.rows.iter().map(|r| r.patches as u64).sum::<u64>(), 2132);
}

fn two_scene_setup(dir: &std::path::Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let scenes = dir.join("scenes");
    write_scene(&scenes, "1", 700, 600, 11);
    write_scene(&scenes, "14", 640, 640, 12);
    let fixture = manifest_fixture();
    let mut lines = fixture.lines();
    let mut text = format!("{}\n", lines.next().unwrap());
    for l in lines.filter(|l| l.starts_with("1,") || l.starts_with("14,")) {
        text.push_str(l);
        text.push('\n');
    }
    let manifest = dir.join("manifest.csv");
    std::fs::write(&manifest, text).unwrap();
    (manifest, scenes)
}

#[test]
fn patches_are_tagged_with_their_split_and_reproducible() {
    let dir = tempdir().unwrap();
    let (manifest, scenes) = two_scene_setup(dir.path());
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "seed = 4\n[patches.sliding]\nwindow = 128\nstride = 64\nneg_pos_ratio = 1.25\n",
    )
    .unwrap();
    let mut trees = Vec::new();
    for (k, jobs) in ["1", "8"].iter().enumerate() {
        let out_dir = dir.path().join(format!("out{k}"));
        let out = run(&[
            "--config",
            s(&cfg),
            "--jobs",
            jobs,
            "patches",
            "--manifest",
            s(&manifest),
            "--scenes",
            s(&scenes),
            "--output",
            s(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        trees.push(tree(&out_dir));
    }
    assert_eq!(trees[0], trees[1]);
    let index = String::from_utf8(trees[0][std::path::Path::new("index.jsonl")].clone()).unwrap();
    let mut pos = [0usize; 2];
    let mut neg = [0usize; 2];
    for line in index.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let scene = v["scene"].as_str().unwrap();
        let split = v["split"].as_str().unwrap();
        assert_eq!(split, if scene == "14" { "test" } else { "train" });
        assert!(v["image"]
            .as_str()
            .unwrap()
            .starts_with(&format!("{split}/{scene}/")));
        let k = (scene == "14") as usize;
        match v["kind"].as_str().unwrap() {
            "positive" => pos[k] += 1,
            "background" => neg[k] += 1,
            other => panic!("{other}"),
        }
    }
    for k in 0..2 {
        assert!(pos[k] > 0);
        // both scenes have enough background windows at this stride
        assert_eq!(neg[k], (1.25 * pos[k] as f64).round() as usize, "scene {k}");
    }
}

#[test]
fn patches_reject_leaking_manifest() {
    let dir = tempdir().unwrap();
    let manifest = dir.path().join("m.csv");
    std::fs::write(
        &manifest,
        "Img,SpillDate,Lat,Lon,AcqDate,DeltaDays,Patches,Split\n\
         1,22/09/2014,-80.7519,-3.5860,11/10/2014,19,38,Train\n\
         1,22/09/2014,-80.7519,-3.5860,11/10/2014,19,38,Test\n",
    )
    .unwrap();
    let out = run(&[
        "--seed",
        "1",
        "patches",
        "--manifest",
        s(&manifest),
        "--scenes",
        ".",
        "--output",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr)
        .to_lowercase()
        .contains("leak"));
}

#[test]
fn patches_with_missing_scene_is_partial() {
    let dir = tempdir().unwrap();
    let (manifest, scenes) = two_scene_setup(dir.path());
    std::fs::remove_file(scenes.join("scene_14.png")).unwrap();
    let out = run(&[
        "--seed",
        "1",
        "patches",
        "--manifest",
        s(&manifest),
        "--scenes",
        s(&scenes),
        "--output",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn loss_eval_reports_breakdown() {
    let dir = tempdir().unwrap();
    let truth = morp::decode_mask(
        &encode_mask(&synthetic_mask(24, 24, 3), MaskFormat::Indexed),
        MaskFormat::Indexed,
    )
    .unwrap();
    let prob = ProbMap::one_hot(&truth);
    let (pp, tp) = (dir.path().join("p.json"), dir.path().join("t.png"));
    std::fs::write(&pp, serde_json::to_string(&prob).unwrap()).unwrap();
    std::fs::write(&tp, encode_mask(&truth, MaskFormat::Indexed)).unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[loss]\nsynth_lambda = 0.5\n").unwrap();
    let out = run(&[
        "--config",
        s(&cfg),
        "loss-eval",
        "--prob",
        s(&pp),
        "--truth",
        s(&tp),
        "--synth-prob",
        s(&pp),
        "--synth-truth",
        s(&tp),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let real = v["real"]["total"].as_f64().unwrap();
    assert!(real < 0.01, "{real}");
    let total = v["total"].as_f64().unwrap();
    assert!((total - 1.5 * real).abs() < 1e-12);
}
