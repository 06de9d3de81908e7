use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .canonicalize()
        .unwrap()
        .display()
        .to_string()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path
}

fn expsep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expsep")).args(args).output().unwrap()
}

fn run_ok(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = expsep(&args);
    assert!(o.status.success(), "{sub} failed: {}", String::from_utf8_lossy(&o.stderr));
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn twelve_point_config(snr: &str) -> String {
    format!(
        "n = 1024\n[model]\ndataset = \"{}\"\n[noise]\nsnr_db = [{snr}]\nseed = 5\n[recovery]\nm_min = 50.0\neta = 0.02\n",
        data("twelve_points_2d.json")
    )
}

fn three_tone_config(extra: &str) -> String {
    format!(
        "n = 1024\n[model]\ndataset = \"{}\"\n[recovery]\nm_min = 1.0\neta = 2.0\n{extra}",
        data("three_tones_1d.json")
    )
}

#[test]
fn synth_twelve_points_writes_two_full_lines() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &twelve_point_config("inf"));
    let out = tmp.path().join("synth");
    run_ok("synth", &cfg, &out, &[]);
    for i in 0..2 {
        let path = out.join(format!("samples_{i}.csv"));
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("ell,re,im\n"));
        let r = rows(&path);
        assert_eq!(r.len(), 2047);
        assert_eq!(&r[0][0], "-1023");
        assert_eq!(&r[2046][0], "1023");
    }
    assert!(!out.join("samples_2.csv").exists());
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["samples"], 4094);
    assert_eq!(manifest["snr_db"], "inf");
    assert_eq!(manifest["lines"][0]["noise_sigma"], 0.0);
    assert_eq!(json(&out.join("model.json"))["sources"].as_array().unwrap().len(), 12);
}

#[test]
fn synth_spatial_scheme_uses_six_n_minus_three_samples() {
    let tmp = TempDir::new().unwrap();
    let body = format!(
        "n = 100\n[model.scene]\nq = 3\ncount = 6\n[directions]\nbasis = \"{}\"\n[noise]\nsnr_db = [10.0]\n",
        data("directions_3d.json")
    );
    let cfg = write_config(tmp.path(), &body);
    let out = tmp.path().join("synth");
    run_ok("synth", &cfg, &out, &[]);
    let total: usize = (0..3).map(|i| rows(&out.join(format!("samples_{i}.csv"))).len()).sum();
    assert_eq!(total, 6 * 100 - 3);
    assert!(!out.join("samples_3.csv").exists());
}

#[test]
fn synth_is_byte_identical_for_a_fixed_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &twelve_point_config("-10.0"));
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    run_ok("synth", &cfg, &a, &["--seed", "11"]);
    run_ok("synth", &cfg, &b, &["--seed", "11", "--threads", "2"]);
    run_ok("synth", &cfg, &c, &["--seed", "12"]);
    for f in ["samples_0.csv", "samples_1.csv", "manifest.json", "model.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(fs::read(a.join("samples_0.csv")).unwrap(), fs::read(c.join("samples_0.csv")).unwrap());
}

#[test]
fn noiseless_bundled_models_recover_within_1e3() {
    let tmp = TempDir::new().unwrap();
    for (name, body, k) in [
        ("tones", three_tone_config("[noise]\nsnr_db = [inf]\n"), 3),
        ("twelve", twelve_point_config("inf"), 12),
    ] {
        let cfg = write_config(tmp.path(), &body);
        let out = tmp.path().join(name);
        run_ok("recover", &cfg, &out, &[]);
        let m = json(&out.join("match.json"));
        assert_eq!(m[0]["matched"], k, "{name}");
        assert!(m[0]["rmse"].as_f64().unwrap() <= 1e-3, "{name}: {}", m[0]["rmse"]);
        assert_eq!(json(&out.join("assembled.json")).as_array().unwrap().len(), k);
        assert_eq!(rows(&out.join("spectrum_0.csv")).len(), 16384);
    }
}

#[test]
fn recover_reports_three_tones_at_minus_ten_db() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &three_tone_config("[noise]\nsnr_db = [-10.0]\nseed = 3\n"));
    let out = tmp.path().join("r");
    run_ok("recover", &cfg, &out, &[]);
    let m = json(&out.join("match.json"));
    assert_eq!(m[0]["matched"], 3);
    let rec = json(&out.join("recovery.json"));
    let first = &rec[0]["sources"][0];
    for key in ["lambda_hat", "amp_hat", "phase_hat", "cluster_diameter"] {
        assert!(first[key].is_number(), "{key}");
    }
    let cond = json(&out.join("conditions.json"));
    for key in ["count_ok", "diameter_ok", "separation_ok", "inclusion_ok"] {
        assert!(cond[0][key].is_boolean(), "{key}");
    }
}

#[test]
fn recover_from_synth_directory_matches_direct_run() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &twelve_point_config("-5.0"));
    let synth = tmp.path().join("synth");
    let direct = tmp.path().join("direct");
    let replay = tmp.path().join("replay");
    run_ok("synth", &cfg, &synth, &[]);
    run_ok("recover", &cfg, &direct, &[]);
    run_ok("recover", &cfg, &replay, &["--samples", synth.to_str().unwrap()]);
    for f in ["recovery.json", "assembled.json", "match.json", "spectrum_1.csv"] {
        assert_eq!(fs::read(direct.join(f)).unwrap(), fs::read(replay.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn bench_sweep_shape_and_localized_counts() {
    let tmp = TempDir::new().unwrap();
    let body = three_tone_config(
        "[noise]\nsnr_db = [-10.0, -5.0, 0.0, 5.0]\ntrials = 10\nseed = 8\n[baselines]\nmethods = [\"esprit\", \"music\"]\n",
    );
    let cfg = write_config(tmp.path(), &body);
    let out = tmp.path().join("bench");
    run_ok("bench", &cfg, &out, &[]);
    let text = fs::read_to_string(out.join("bench.csv")).unwrap();
    assert!(text.starts_with("snr_db,method,samples,total_points,recuperated_mean,rmse_mean,rmse_std,runtime_s\n"));
    let r = rows(&out.join("bench.csv"));
    assert_eq!(r.len(), 4 * 3);
    for row in r.iter().filter(|row| &row[1] == "localized") {
        assert_eq!(row[4].parse::<f64>().unwrap(), 3.0, "snr {}", &row[0]);
    }
}

#[test]
fn bench_is_reproducible_without_timing() {
    let tmp = TempDir::new().unwrap();
    let body = three_tone_config("[noise]\nsnr_db = [0.0]\ntrials = 1\nseed = 4\n[baselines]\nmethods = [\"esprit\"]\n[bench]\ntiming = false\n");
    let cfg = write_config(tmp.path(), &body);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok("bench", &cfg, &a, &[]);
    run_ok("bench", &cfg, &b, &["--threads", "1"]);
    assert_eq!(fs::read(a.join("bench.csv")).unwrap(), fs::read(b.join("bench.csv")).unwrap());
}

#[test]
fn plotdata_kernel_threshold_and_histogram() {
    let tmp = TempDir::new().unwrap();
    let body = three_tone_config("[noise]\nsnr_db = [-10.0]\nseed = 2\n[plot]\nkernel_degrees = [128]\n");
    let cfg = write_config(tmp.path(), &body.replace("n = 1024", "n = 256"));
    let out = tmp.path().join("plot");
    run_ok("plotdata", &cfg, &out, &[]);

    let kernel = rows(&out.join("kernel_128.csv"));
    assert_eq!(kernel.len(), 8192);
    let (arg, max) = kernel
        .iter()
        .map(|r| (r[0].parse::<f64>().unwrap(), r[3].parse::<f64>().unwrap()))
        .fold((f64::NAN, 0.0), |acc, (x, a)| if a > acc.1 { (x, a) } else { acc });
    assert!((max - 1.0).abs() <= 1e-12);
    assert_eq!(arg, 0.0);

    let sigma = rows(&out.join("sigma.csv"));
    assert!(sigma.iter().all(|r| &r[4] == "0.5"));
    let above = sigma.iter().filter(|r| r[3].parse::<f64>().unwrap() > 0.5).count();

    let recover_out = tmp.path().join("rec");
    run_ok("recover", &cfg, &recover_out, &[]);
    let k_hat = json(&recover_out.join("recovery.json"))[0]["sources"].as_array().unwrap().len();
    assert!(above >= k_hat, "{above} nodes above threshold, K̂ = {k_hat}");
    assert!(rows(&out.join("singular_values.csv")).len() == 255);
}

#[test]
fn baseline_command_on_three_tones() {
    let tmp = TempDir::new().unwrap();
    let body = three_tone_config("[noise]\nsnr_db = [inf]\n[baselines]\nmethods = [\"esprit\", \"music\"]\n");
    let cfg = write_config(tmp.path(), &body.replace("n = 1024", "n = 128"));
    let out = tmp.path().join("base");
    run_ok("baseline", &cfg, &out, &[]);
    let b = json(&out.join("baseline.json"));
    assert_eq!(b.as_array().unwrap().len(), 2);
    for rec in b.as_array().unwrap() {
        let est = rec["estimates"].as_array().unwrap();
        assert_eq!(est.len(), 3);
        assert_eq!(rec["matches"][0]["matched"], 3);
    }
    let esprit = &b[0]["estimates"];
    let mut lambdas: Vec<f64> = (0..3).map(|i| esprit[i]["lambda_hat"].as_f64().unwrap()).collect();
    lambdas.sort_by(f64::total_cmp);
    for (l, t) in lambdas.iter().zip([-3.0, -1.0, 2.0]) {
        assert!((l - t).abs() <= 1e-8);
    }
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();

    let missing = expsep(&["synth", "--config", "/nonexistent.cfg", "--out", out]);
    assert_eq!(missing.status.code(), Some(2));

    let cfg = write_config(tmp.path(), "n = 64\n[model.scene]\nq = 2\ncount = 3\n[noise]\nsnr_db = []\n");
    assert_eq!(expsep(&["synth", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(), Some(2));

    let cfg = write_config(tmp.path(), &twelve_point_config("0.0"));
    assert_eq!(expsep(&["baseline", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(), Some(2));

    let dirs = tmp.path().join("dirs.json");
    fs::write(&dirs, r#"{"q": 2, "lines": [{"name": "a", "direction": [1.0, 2.0]}, {"name": "b", "direction": [2.0, 4.0]}]}"#).unwrap();
    let body = format!("n = 64\n[model.scene]\nq = 2\ncount = 3\n[directions]\nbasis = \"{}\"\n[noise]\nsnr_db = [0.0]\n", dirs.display());
    let cfg = write_config(tmp.path(), &body);
    assert_eq!(expsep(&["synth", "--config", cfg.to_str().unwrap(), "--out", out]).status.code(), Some(3));
}
