mod support;

use std::fs;
use std::path::Path;

use rustico_core::datasets::{make_fixture, FixtureKind, FixtureNoise};
use rustico_core::{presets, GrayImage, RunConfig, RusticoOperator};
use support::rustico;

fn write_config(dir: &Path, edit: impl FnOnce(&mut RunConfig)) {
    let mut cfg = presets::tb_roses_1();
    cfg.dataset.root = "data".into();
    cfg.output = "run".into();
    edit(&mut cfg);
    fs::write(dir.join("config.json"), cfg.to_json()).unwrap();
}

fn bars_corpus(root: &Path, n: usize) {
    fs::create_dir_all(root.join("images")).unwrap();
    fs::create_dir_all(root.join("centerline")).unwrap();
    for k in 0..n {
        let kind = FixtureKind::Bar { size: 64, length: 41.0, width: 3.0, angle: k as f64 * 0.4 };
        let fx = make_fixture(&kind, FixtureNoise { amplitude: 0.1, seed: k as u64 });
        fx.image.inverted().save_png_scaled(root.join(format!("images/b{k}.png"))).unwrap();
        fx.ground_truth.save_png(root.join(format!("centerline/b{k}.png"))).unwrap();
    }
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = rustico(args, dir);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn summary(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn configure_writes_tuple_table_and_is_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_config(dir, |_| {});
    let table = ok(&["configure", "--config", "config.json"], dir);
    assert_eq!(table.lines().count(), 1 + 17);
    let first = fs::read(dir.join("run/filter.json")).unwrap();
    ok(&["configure", "--config", "config.json"], dir);
    assert_eq!(fs::read(dir.join("run/filter.json")).unwrap(), first);

    let op = RusticoOperator::from_json(std::str::from_utf8(&first).unwrap()).unwrap();
    let radii: Vec<f64> = op.excitatory().tuples().iter().map(|t| t.rho).collect();
    assert_eq!(radii[0], 0.0);
    assert_eq!(*radii.last().unwrap(), 16.0);
    assert_eq!(op.xi(), 1.5);
    assert_eq!(op.orientations().len(), 12);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_config(dir, |c| c.operator.sigma = 0.0);
    assert_eq!(rustico(&["configure", "--config", "config.json"], dir).status.code(), Some(2));
    assert_eq!(rustico(&["configure", "--config", "missing.json"], dir).status.code(), Some(3));

    write_config(dir, |_| {});
    let out = rustico(&["apply", "--config", "config.json", "--threshold", "1.5", "x.png"], dir);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_image_does_not_stop_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_config(dir, |c| c.operator.orientations = 2);
    GrayImage::filled(40, 40, 0.3).save_png_scaled(dir.join("good.png")).unwrap();
    fs::write(dir.join("bad.png"), b"not an image").unwrap();
    let out = rustico(&["apply", "--config", "config.json", "--out", "resp", "good.png", "bad.png"], dir);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad"));
    assert!(dir.join("resp/good.png").is_file());
    let sidecar = summary(&dir.join("resp/apply.json"));
    assert_eq!(sidecar["inputs"].as_array().unwrap().len(), 1);
    assert_eq!(sidecar["failures"].as_array().unwrap().len(), 1);
}

#[test]
fn xi_zero_matches_cosfire_files_and_zero_image_gives_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_config(dir, |c| {
        c.operator.xi = 0.0;
        c.operator.orientations = 4;
    });
    let fx =
        make_fixture(&FixtureKind::Bar { size: 64, length: 41.0, width: 3.0, angle: 0.3 }, FixtureNoise::default());
    fx.image.inverted().save_png_scaled(dir.join("bar.png")).unwrap();
    // inverted input: an all-white file is a zero image
    GrayImage::filled(48, 48, 1.0).save_png_scaled(dir.join("blank.png")).unwrap();
    ok(&["apply", "--config", "config.json", "--out", "r", "bar.png", "blank.png"], dir);
    ok(&["apply", "--config", "config.json", "--mode", "cosfire", "--out", "c", "bar.png", "blank.png"], dir);
    for name in ["bar.png", "blank.png"] {
        assert_eq!(fs::read(dir.join("r").join(name)).unwrap(), fs::read(dir.join("c").join(name)).unwrap());
    }
    let blank = GrayImage::load(dir.join("r/blank.png"), Default::default()).unwrap();
    assert_eq!(blank.max_value(), 0.0);

    let sidecar = summary(&dir.join("r/apply.json"));
    assert_eq!(sidecar["mode"], "rustico");
    assert_eq!(sidecar["inputs"][0]["id"], "bar");
    assert_eq!(sidecar["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(sidecar["version"].is_string());
}

#[test]
fn bar_response_peaks_on_centerline() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_config(dir, |_| {});
    let fx =
        make_fixture(&FixtureKind::Bar { size: 72, length: 51.0, width: 3.0, angle: 0.0 }, FixtureNoise::default());
    fx.image.inverted().save_png_scaled(dir.join("bar.png")).unwrap();
    ok(&["apply", "--config", "config.json", "--threshold", "0.5", "--out", "r", "bar.png"], dir);
    let resp = GrayImage::load(dir.join("r/bar.png"), Default::default()).unwrap();
    let (x, y) = resp.argmax();
    assert!(fx.ground_truth.get(x, y), "argmax ({x},{y}) off the centerline");
    assert!(dir.join("r/bar_mask.png").is_file());
}

#[test]
fn eval_of_ground_truth_is_perfect_and_self_baseline_gives_p_one() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    bars_corpus(&dir.join("data"), 6);
    write_config(dir, |_| {});
    fs::create_dir_all(dir.join("gt_resp")).unwrap();
    for k in 0..6 {
        fs::copy(dir.join(format!("data/centerline/b{k}.png")), dir.join(format!("gt_resp/b{k}.png"))).unwrap();
    }
    ok(&["eval", "--config", "config.json", "--responses", "gt_resp", "--out", "e1"], dir);
    let s = summary(&dir.join("e1/summary.json"));
    assert_eq!(s["t_star"], 0.01);
    assert_eq!(s["averages"]["f"], 1.0);
    let sweep = fs::read_to_string(dir.join("e1/sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 101);

    ok(
        &["eval", "--config", "config.json", "--responses", "gt_resp", "--out", "e2", "--baseline", "e1/per_image.csv"],
        dir,
    );
    assert_eq!(summary(&dir.join("e2/summary.json"))["p_value"], 1.0);
}

#[test]
fn eval_reports_unmatched_ids() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    bars_corpus(&dir.join("data"), 3);
    write_config(dir, |_| {});
    fs::create_dir_all(dir.join("resp")).unwrap();
    fs::copy(dir.join("data/centerline/b0.png"), dir.join("resp/b0.png")).unwrap();
    fs::copy(dir.join("data/centerline/b0.png"), dir.join("resp/stray.png")).unwrap();
    let out = rustico(&["eval", "--config", "config.json", "--responses", "resp"], dir);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("b1, b2") && err.contains("stray"), "{err}");
}

#[test]
fn shipped_presets_match_library_presets() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    for cfg in [presets::tb_roses_1(), presets::cracktree206(), presets::drive()] {
        let text = fs::read_to_string(dir.join(format!("{}.json", cfg.dataset.layout.name()))).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
