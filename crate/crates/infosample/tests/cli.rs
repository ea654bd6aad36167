mod common;

use std::fs;
use std::path::Path;

use common::{code, run, stderr, textured, write_png};
use infosample::iimp::load_map;
use infosample::io::load_image;
use infosample::manifest::load_manifest;
use infosample_core::sampling::iou;
use infosample_core::MetricKind;

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn degrade_halves_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let (src, dst) = (dir.path().join("in.png"), dir.path().join("out.png"));
    write_png(&textured(100, 100, 3, 1), &src);
    let out = run(&["degrade", "--input", p(&src), "--output", p(&dst), "--scale", "2"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let lr = load_image(&dst).unwrap();
    assert_eq!((lr.width(), lr.height(), lr.channels()), (50, 50, 3));
}

#[test]
fn degrade_rejects_unsupported_scale() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("in.png");
    write_png(&textured(20, 20, 1, 1), &src);
    let out = run(&["degrade", "--input", p(&src), "--output", p(&dir.path().join("o.png")), "--scale", "5"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("supported: 2, 3, 4"), "{}", stderr(&out));
}

#[test]
fn degrade_directory_keeps_stems() {
    let dir = tempfile::tempdir().unwrap();
    let (src, dst) = (dir.path().join("hr"), dir.path().join("lr"));
    fs::create_dir(&src).unwrap();
    for name in ["a", "b", "c"] {
        write_png(&textured(31, 29, 3, 7), &src.join(format!("{name}.png")));
    }
    let out = run(&["degrade", "--input", p(&src), "--output", p(&dst), "--scale", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut names: Vec<_> = fs::read_dir(&dst).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names, ["a.png", "b.png", "c.png"]);
    let lr = load_image(&dst.join("b.png")).unwrap();
    assert_eq!((lr.width(), lr.height()), (10, 9));
}

#[test]
fn score_defaults_and_naive_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let hr = dir.path().join("hr.png");
    write_png(&textured(64, 48, 3, 3), &hr);
    let (fast, naive) = (dir.path().join("fast.iimp"), dir.path().join("naive.iimp"));
    let base = ["score", "--hr", p(&hr), "--scale", "2", "--patch-size", "16"];
    let out = run(&[&base[..], &["--out-map", p(&fast)]].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = run(&[&base[..], &["--out-map", p(&naive), "--naive"]].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(&fast).unwrap(), fs::read(&naive).unwrap());

    let map = load_map(&fast).unwrap();
    assert_eq!(map.geometry().stride(), 2);
    assert_eq!(map.metric(), MetricKind::PsnrBilinear);
    assert_eq!((map.rows(), map.cols()), (17, 25));
}

#[test]
fn score_geometry_errors_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let hr = dir.path().join("hr.png");
    let lr = dir.path().join("lr.png");
    write_png(&textured(64, 48, 3, 3), &hr);
    write_png(&textured(30, 24, 3, 3), &lr);
    let map = dir.path().join("m.iimp");
    let out = run(&["score", "--hr", p(&hr), "--scale", "2", "--patch-size", "191", "--out-map", p(&map)]);
    assert_eq!(code(&out), 2);
    let out =
        run(&["score", "--hr", p(&hr), "--lr", p(&lr), "--scale", "2", "--patch-size", "16", "--out-map", p(&map)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("dimension mismatch"), "{}", stderr(&out));
    assert!(!map.exists());
}

#[test]
fn missing_input_is_io_error() {
    let out = run(&["heatmap", "--map", "/nonexistent/m.iimp", "--output", "/tmp/x.png"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = run(&["heatmap", "--map", "m.iimp", "--output", "x.png", "--colour"]);
    assert_eq!(code(&out), 1);
}

fn scored_map(dir: &Path) -> std::path::PathBuf {
    let hr = dir.join("hr.png");
    write_png(&textured(96, 64, 3, 11), &hr);
    let map = dir.join("hr.iimp");
    let out = run(&["score", "--hr", p(&hr), "--scale", "2", "--patch-size", "16", "--out-map", p(&map)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    map
}

#[test]
fn sample_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let map = scored_map(dir.path());
    let anchors = load_map(&map).unwrap().len();
    let manifest = dir.path().join("m.json");

    let out =
        run(&["sample", "--map", p(&map), "--strategy", "greedy", "--portion", "1.0", "--out-manifest", p(&manifest)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let m = load_manifest(&manifest).unwrap();
    assert_eq!(m.entries.len(), anchors);
    assert_eq!(m.image, "hr");

    let out = run(&[
        "sample",
        "--map",
        p(&map),
        "--strategy",
        "nms",
        "--count",
        "50",
        "--iou-threshold",
        "0",
        "--out-manifest",
        p(&manifest),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let m = load_manifest(&manifest).unwrap();
    assert!(!m.entries.is_empty());
    for (i, a) in m.entries.iter().enumerate() {
        for b in &m.entries[i + 1..] {
            assert_eq!(iou((a.u, a.v), (b.u, b.v), 16), 0.0);
        }
    }

    let dart = ["sample", "--map", p(&map), "--strategy", "dart", "--count", "5", "--out-manifest", p(&manifest)];
    assert_eq!(code(&run(&dart)), 1);
    let out = run(&[&dart[..], &["--seed", "42"]].concat());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let first = fs::read(&manifest).unwrap();
    assert_eq!(code(&run(&[&dart[..], &["--seed", "42"]].concat())), 0);
    assert_eq!(fs::read(&manifest).unwrap(), first);
}

#[test]
fn sample_needs_exactly_one_budget() {
    let dir = tempfile::tempdir().unwrap();
    let map = scored_map(dir.path());
    let m = dir.path().join("m.json");
    let base = ["sample", "--map", p(&map), "--strategy", "greedy", "--out-manifest", p(&m)];
    assert_eq!(code(&run(&base)), 2);
    assert_eq!(code(&run(&[&base[..], &["--portion", "0.5", "--count", "3"]].concat())), 2);
    assert_eq!(code(&run(&[&base[..], &["--portion", "1.5"]].concat())), 2);
}

#[test]
fn crop_and_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let map = scored_map(dir.path());
    let manifest = dir.path().join("m.json");
    let out =
        run(&["sample", "--map", p(&map), "--strategy", "greedy", "--count", "3", "--out-manifest", p(&manifest)]);
    assert_eq!(code(&out), 0);
    let crops = dir.path().join("crops");
    let out = run(&["crop", "--manifest", p(&manifest), "--hr", p(&dir.path().join("hr.png")), "--out-dir", p(&crops)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read_dir(&crops).unwrap().count(), 6);
    let lr = load_image(&crops.join("hr_000002_lr.png")).unwrap();
    assert_eq!((lr.width(), lr.height()), (8, 8));

    let heat = dir.path().join("heat.png");
    let out = run(&["heatmap", "--map", p(&map), "--output", p(&heat)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let img = load_image(&heat).unwrap();
    assert_eq!((img.width(), img.height(), img.channels()), (41, 25, 1));
}

#[test]
fn bench_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let hr = dir.path().join("hr.png");
    write_png(&textured(64, 64, 3, 5), &hr);
    let out = run(&["bench", "--hr", p(&hr), "--scale", "2", "--patch-size", "16", "--repeats", "1", "--json"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["repeats"], 1);
    assert_eq!(v["anchors"], 25 * 25);
    assert!(v["speedup"].as_f64().unwrap() > 0.0);
    assert_eq!(code(&run(&["bench", "--hr", p(&hr), "--scale", "2", "--patch-size", "16", "--repeats", "0"])), 1);
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != "report.json" {
                out.push((path.strip_prefix(root).unwrap().display().to_string(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_minimal_config_builds_full_tree() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("in")).unwrap();
    for (i, name) in ["x", "y"].iter().enumerate() {
        write_png(&textured(97, 71, 3, i as u64 + 1), &dir.path().join("in").join(format!("{name}.png")));
    }
    let config = dir.path().join("job.json");
    fs::write(
        &config,
        r#"{"input": "in", "output": "out", "scale": 2, "patch_size": 32, "strategy": "greedy", "portion": 0.1}"#,
    )
    .unwrap();
    let out = run(&["run", "--config", p(&config)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let root = dir.path().join("out");
    for sub in ["lr/x.png", "maps/x.iimp", "manifests/y.json", "heatmaps/y.png", "crops/y_000000_hr.png", "report.json"]
    {
        assert!(root.join(sub).is_file(), "missing {sub}");
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(root.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["images"], 2);
    assert_eq!(report["lr_source"], "synthesized-bicubic");

    let first = tree(&root);
    assert_eq!(code(&run(&["run", "--config", p(&config)])), 0);
    assert_eq!(tree(&root), first);
}

#[test]
fn run_config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("job.json");
    fs::write(&config, r#"{"input": "in", "output": "out", "patch_size": 32, "strategy": "greedy", "portion": 0.1}"#)
        .unwrap();
    let out = run(&["run", "--config", p(&config)]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("scale"), "{}", stderr(&out));
}

/// `--help` for every subcommand against checked-in snapshots.
/// Set `UPDATE_SNAPSHOTS=1` to rewrite them.
#[test]
fn help_snapshots() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots");
    let update = std::env::var_os("UPDATE_SNAPSHOTS").is_some();
    for sub in ["", "degrade", "score", "sample", "crop", "heatmap", "bench", "run"] {
        let args: Vec<&str> = if sub.is_empty() { vec!["--help"] } else { vec![sub, "--help"] };
        let out = run(&args);
        assert_eq!(code(&out), 0);
        let text = String::from_utf8(out.stdout).unwrap();
        let file = dir.join(format!("help_{}.txt", if sub.is_empty() { "main" } else { sub }));
        if update {
            fs::create_dir_all(&dir).unwrap();
            fs::write(&file, &text).unwrap();
        } else {
            let expected = fs::read_to_string(&file).unwrap_or_else(|_| panic!("missing snapshot {}", file.display()));
            assert_eq!(text, expected, "help for `{sub}` changed");
        }
    }
}
