use std::fs;
use std::path::Path;
use std::process::Command;

use panfuse::cli::{cmd_evaluate, cmd_sharpen, cmd_simulate, manifest_parameters};
use panfuse::io::{read_cube, read_plane, write_cube, Dtype};
use panfuse::operators::nearest_upsample;
use panfuse::sim::{piecewise_constant_scene, SceneSpec};
use serde_json::json;

fn write_json(path: &Path, value: serde_json::Value) {
    fs::write(path, serde_json::to_string_pretty(&value).unwrap()).unwrap();
}

/// Writes a 16×16×3 reference and the three configs into `dir`.
fn setup(dir: &Path) {
    let reference = piecewise_constant_scene(&SceneSpec {
        width: 16,
        height: 16,
        bands: 3,
        shapes: 4,
        seed: 1,
    })
    .unwrap();
    write_cube(&reference, dir.join("scene.bin"), Dtype::Float64).unwrap();
    write_json(
        &dir.join("simulate.json"),
        json!({"reference": "scene.bin", "q": 2, "psf": {"kind": "average"},
               "g": "uniform", "sigma_x": 0.0, "sigma_p": 0.0, "seed": 3}),
    );
    write_json(
        &dir.join("sharpen.json"),
        json!({"x": "x.bin", "p": "p.bin", "q": 2, "sigma_x": 1e-4, "sigma_p": 1e-4,
               "beta": 1000.0, "gamma": 0.01, "iters": 200, "log_every": 10}),
    );
    write_json(
        &dir.join("evaluate.json"),
        json!({"estimate": "u.bin", "reference": "reference.bin", "x": "x.bin", "p": "p.bin"}),
    );
}

fn run_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_panfuse")).args(args).output().unwrap()
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let sim = cmd_simulate(&dir.path().join("simulate.json"), None).unwrap();
    let x = read_cube(&sim.x).unwrap();
    assert_eq!((x.width(), x.height(), x.bands()), (8, 8, 3));
    let params = manifest_parameters(&sim.manifest).unwrap();
    for key in ["q", "psf", "g", "sigma_x", "sigma_p", "offset", "seed"] {
        assert!(params.contains_key(key), "{key}");
    }

    let sharp = cmd_sharpen(&dir.path().join("sharpen.json"), None).unwrap();
    let csv = fs::read_to_string(&sharp.log).unwrap();
    assert_eq!(csv.lines().count(), 1 + 20);
    assert_eq!(sharp.report.iterations, 200);

    let eval = cmd_evaluate(&dir.path().join("evaluate.json"), None).unwrap();
    let r = eval.report;
    let base = panfuse::metrics::rmse(&nearest_upsample(&x, 2), &read_cube(&sim.reference).unwrap()).unwrap();
    assert!(r.rmse.unwrap() < base);
    assert!(r.d_s.is_some() && r.d_lambda.is_some() && r.fcc.is_some());
    let text = fs::read_to_string(&eval.text).unwrap();
    assert!(text.contains("rmse_x100 = ") && text.contains("# RMSE (x100)"));
}

#[test]
fn identical_estimate_scores_zero() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    cmd_simulate(&dir.path().join("simulate.json"), None).unwrap();
    write_json(
        &dir.path().join("self.json"),
        json!({"estimate": "reference.bin", "reference": "reference.bin"}),
    );
    let r = cmd_evaluate(&dir.path().join("self.json"), None).unwrap().report;
    assert_eq!((r.rmse, r.ergas, r.sam), (Some(0.0), Some(0.0), Some(0.0)));
    assert!(r.fcc.is_none() && r.d_s.is_none());
}

#[test]
fn quarter_resolution_config_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    write_json(
        &dir.path().join("q4.json"),
        json!({"reference": "scene.bin", "q": 4, "psf": {"kind": "average"}, "g": "uniform",
               "sigma_x": 0.0, "sigma_p": 0.0}),
    );
    let out = dir.path().join("q4");
    let sim = cmd_simulate(&dir.path().join("q4.json"), Some(&out)).unwrap();
    let x = read_cube(&sim.x).unwrap();
    assert_eq!((x.width(), x.height()), (4, 4));
    assert!(out.join("x.hdr.json").exists());
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let noisy = json!({"reference": "scene.bin", "q": 2, "sigma_x": 0.01, "sigma_p": 0.02, "seed": 5});
    write_json(&dir.path().join("noisy.json"), noisy);
    let a = cmd_simulate(&dir.path().join("noisy.json"), Some(&dir.path().join("a"))).unwrap();
    let b = cmd_simulate(&dir.path().join("noisy.json"), Some(&dir.path().join("b"))).unwrap();
    assert_eq!(fs::read(&a.x).unwrap(), fs::read(&b.x).unwrap());
    assert_eq!(fs::read(&a.p).unwrap(), fs::read(&b.p).unwrap());
}

#[test]
fn zero_iterations_return_the_upsampled_input() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let sim = cmd_simulate(&dir.path().join("simulate.json"), None).unwrap();
    write_json(
        &dir.path().join("zero.json"),
        json!({"x": "x.bin", "p": "p.bin", "q": 2, "iters": 0, "output": "u0.bin"}),
    );
    let out = cmd_sharpen(&dir.path().join("zero.json"), None).unwrap();
    let u = read_cube(&out.estimate).unwrap();
    assert_eq!(u, nearest_upsample(&read_cube(&sim.x).unwrap(), 2));
}

#[test]
fn binary_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let cfg = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let ok = run_bin(&["simulate", "--config", &cfg("simulate.json")]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    // unknown keys are a config error and are all named
    write_json(&dir.path().join("typo.json"), json!({"x": "x.bin", "p": "p.bin", "q": 2, "betta": 1, "gama": 2}));
    let typo = run_bin(&["sharpen", "--config", &cfg("typo.json")]);
    assert_eq!(typo.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&typo.stderr);
    assert!(msg.contains("betta") && msg.contains("gama"), "{msg}");

    // missing reference file is a data error
    write_json(&dir.path().join("missing.json"), json!({"reference": "nope.bin", "q": 2}));
    assert_eq!(run_bin(&["simulate", "--config", &cfg("missing.json")]).status.code(), Some(3));

    // a pan image of the wrong size fails before any iteration
    let p = read_plane(dir.path().join("p.bin")).unwrap();
    let cropped = panfuse::Plane::new(16, 8, p.data()[..128].to_vec()).unwrap();
    panfuse::io::write_plane(&cropped, dir.path().join("small_p.bin"), Dtype::Float64).unwrap();
    write_json(&dir.path().join("bad.json"), json!({"x": "x.bin", "p": "small_p.bin", "q": 2, "iters": 100000000}));
    let bad = run_bin(&["sharpen", "--config", &cfg("bad.json"), "--out", &cfg("bad_out")]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(!dir.path().join("bad_out").join("u.bin").exists());

    // nothing to evaluate
    write_json(&dir.path().join("empty.json"), json!({"estimate": "reference.bin"}));
    assert_eq!(run_bin(&["evaluate", "--config", &cfg("empty.json")]).status.code(), Some(2));

    // an unparseable config
    fs::write(dir.path().join("broken.json"), "{").unwrap();
    assert_eq!(run_bin(&["evaluate", "--config", &cfg("broken.json")]).status.code(), Some(2));

    // beta = 0 is rejected as a config error
    write_json(&dir.path().join("beta.json"), json!({"x": "x.bin", "p": "p.bin", "q": 2, "beta": 0.0}));
    assert_eq!(run_bin(&["sharpen", "--config", &cfg("beta.json")]).status.code(), Some(2));
}

#[test]
fn missing_reference_gives_a_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    cmd_simulate(&dir.path().join("simulate.json"), None).unwrap();
    cmd_sharpen(&dir.path().join("sharpen.json"), None).unwrap();
    write_json(
        &dir.path().join("noref.json"),
        json!({"estimate": "u.bin", "x": "x.bin", "p": "p.bin"}),
    );
    let out = run_bin(&["evaluate", "--config", &dir.path().join("noref.json").to_string_lossy()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rmse_x100 = n/a"));
    assert!(stdout.contains("ergas = n/a") && stdout.contains("sam_deg = n/a"));
    assert!(!stdout.contains("d_s_x100 = n/a"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert!(json["rmse"].is_null());
    assert!(json["d_lambda"].is_number());
}

#[test]
fn float32_outputs_widen_on_read() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    write_json(
        &dir.path().join("f32.json"),
        json!({"reference": "scene.bin", "q": 2, "dtype": "float32"}),
    );
    let sim = cmd_simulate(&dir.path().join("f32.json"), None).unwrap();
    let header = fs::read_to_string(dir.path().join("x.hdr.json")).unwrap();
    assert!(header.contains("float32"));
    let reference = read_cube(&sim.reference).unwrap();
    let original = read_cube(dir.path().join("scene.bin")).unwrap();
    for (a, b) in reference.data().iter().zip(original.data()) {
        assert!((a - b).abs() <= 1e-6 * b.abs());
    }
}
