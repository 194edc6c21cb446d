use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::TempDir;

use ponomarev::cantor::harmonic_sequence;
use ponomarev::cli::{main_with_args, EXIT_CONFIG, EXIT_OK, EXIT_VERIFY};

fn write_config(dir: &TempDir, body: &str) -> PathBuf {
    let path = dir.path().join("run.json");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], cfg: &Path, out: &Path) -> i32 {
    let mut full = vec!["ponomarev"];
    full.extend_from_slice(args);
    full.extend(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    main_with_args(full)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Reads a binary PGM written by `render`: returns (width, height, data).
fn read_pgm(path: &Path) -> (usize, usize, Vec<u8>) {
    let bytes = fs::read(path).unwrap();
    let mut lines = 0;
    let mut pos = 0;
    while lines < 4 {
        if bytes[pos] == b'\n' {
            lines += 1;
        }
        pos += 1;
    }
    let header = std::str::from_utf8(&bytes[..pos]).unwrap();
    let dims: Vec<usize> = header
        .lines()
        .nth(2)
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    (dims[0], dims[1], bytes[pos..].to_vec())
}

const HARMONIC: &str = r#"{"theorem":"custom","depth":10,"seed":3,"samples":500,
    "sequence":{"family":"harmonic","dimension":2}}"#;

#[test]
fn verify_passes_on_shipped_configs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["thm1_iterated_log.json", "thm2_power.json", "harmonic.json", "identity.json"] {
        let out = TempDir::new().unwrap();
        let code = run(&["verify", "--depth", "12"], &root.join(name), out.path());
        assert_eq!(code, EXIT_OK, "{name}");
        let report = json(&out.path().join("verify.json"));
        assert_eq!(report["report"]["passed"], Value::Bool(true), "{name}");
    }
}

#[test]
fn tampered_coefficients_fail_verification() {
    let dir = TempDir::new().unwrap();
    let depth = 6;
    let a = harmonic_sequence(depth);
    let b: Vec<f64> = a.iter().map(|x| 0.5 * (1.0 + x)).collect();
    let alpha = vec![0.5; depth + 1];
    let mut beta: Vec<f64> = (0..=depth).map(|k| 2f64.powi(-(k as i32) - 1)).collect();
    beta[3] *= 1.0 + 1e-3;
    let cfg = serde_json::json!({
        "theorem": "custom",
        "depth": depth,
        "samples": 200,
        "sequence": {"family": "explicit", "dimension": 2, "a": a, "b": b, "alpha": alpha, "beta": beta},
    });
    let path = write_config(&dir, &cfg.to_string());
    let out = dir.path().join("out");
    assert_eq!(run(&["verify"], &path, &out), EXIT_VERIFY);
    let report = json(&out.join("verify.json"));
    let checks = report["report"]["checks"].as_array().unwrap();
    let gluing = checks.iter().find(|c| c["name"] == "gluing_ulps").unwrap();
    assert_eq!(gluing["passed"], Value::Bool(false));
}

#[test]
fn configuration_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let good = write_config(&dir, HARMONIC);
    assert_eq!(run(&["verify", "--theorem", "3"], &good, &out), EXIT_CONFIG);
    assert_eq!(run(&["verify", "--eps-grid", "1:0:4"], &good, &out), EXIT_CONFIG);
    assert_eq!(run(&["frobnicate"], &good, &out), EXIT_CONFIG);
    assert_eq!(run(&["eval"], &good, &out), EXIT_CONFIG);
    let bad = write_config(&dir, r#"{"theorem":"custom","depth":4,"bogus":1}"#);
    assert_eq!(run(&["sequence"], &bad, &out), EXIT_CONFIG);
    assert_eq!(main_with_args(["ponomarev", "verify"]), EXIT_CONFIG);
}

#[test]
fn outputs_carry_digest_and_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, HARMONIC);
    let out = dir.path().join("out");
    assert_eq!(run(&["sequence"], &cfg, &out), EXIT_OK);
    assert_eq!(run(&["hausdorff"], &cfg, &out), EXIT_OK);
    assert_eq!(run(&["norms", "--eps-grid", "0.1:1:4"], &cfg, &out), EXIT_OK);
    let seq = json(&out.join("sequence.json"));
    let digest = seq["config_digest"].as_str().unwrap().to_owned();
    assert_eq!(digest.len(), 64);
    assert_eq!(seq["seed"], 3);
    assert_eq!(seq["report"]["rows"].as_array().unwrap().len(), 11);
    let csv = fs::read_to_string(out.join("sequence.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), format!("# config_digest={digest} seed=3"));
    let norms = json(&out.join("norms.json"));
    assert_eq!(norms["report"]["eps"].as_array().unwrap().len(), 4);
    // an override changes the digest
    assert_ne!(norms["config_digest"].as_str().unwrap(), digest);
    assert_eq!(json(&out.join("hausdorff.json"))["report"].as_array().unwrap().len(), 11);
}

#[test]
fn eval_keeps_going_past_bad_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, HARMONIC);
    let points = dir.path().join("points.txt");
    fs::write(&points, "0.1 0.2\n# comment\n2.0 0.0\nnot a point\n-0.7,0.3\n").unwrap();
    let out = dir.path().join("out");
    let code = run(&["eval", "--points", points.to_str().unwrap()], &cfg, &out);
    assert_eq!(code, EXIT_OK);
    let csv = fs::read_to_string(out.join("eval.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].ends_with(','));
    assert!(rows[1].ends_with('"') && rows[2].ends_with('"'));
    let fields: Vec<&str> = rows[3].split(',').collect();
    let err: f64 = fields[7].parse().unwrap();
    assert!(err < 1e-12);
}

#[test]
fn identity_renders_flat() {
    let dir = TempDir::new().unwrap();
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/identity.json");
    let out = dir.path().join("out");
    assert_eq!(run(&["render", "--resolution", "33"], &root, &out), EXIT_OK);
    let (w, h, data) = read_pgm(&out.join("displacement.pgm"));
    assert_eq!((w, h), (33, 33));
    assert!(data.iter().all(|&v| v == 0));
    let ppm = fs::read(out.join("jacobian.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n# config_digest="));
}

#[test]
fn regions_show_depth_one_cubes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"{"theorem":"custom","depth":1,"sequence":{"family":"harmonic","dimension":2}}"#,
    );
    let out = dir.path().join("out");
    let n = 201;
    assert_eq!(run(&["render", "--resolution", "201"], &cfg, &out), EXIT_OK);
    let (_, _, data) = read_pgm(&out.join("regions.pgm"));
    // a_1 = 1/2, b_1 = 3/4: inner target cubes of half-edge 3/8 about (±1/2, ±1/2)
    let rt = 0.375;
    for j in 0..n {
        for i in 0..n {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let y = 1.0 - 2.0 * j as f64 / (n - 1) as f64;
            let d = ((x.abs() - 0.5).abs()).max((y.abs() - 0.5).abs());
            if (d - rt).abs() < 0.02 {
                continue;
            }
            let expected = if d < rt { 255 } else { 0 };
            assert_eq!(data[j * n + i], expected, "pixel ({i}, {j})");
        }
    }
    // the outer boundary stays fixed
    let csv = fs::read_to_string(out.join("render.csv")).unwrap();
    for line in csv.lines().skip(2) {
        let f: Vec<f64> = line.split(',').take(6).map(|t| t.parse().unwrap()).collect();
        if f[2].abs() == 1.0 || f[3].abs() == 1.0 {
            assert_eq!((f[4], f[5]), (f[2], f[3]));
        }
    }
}

#[test]
fn render_rejects_other_dimensions() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        r#"{"theorem":"custom","depth":3,"sequence":{"family":"harmonic","dimension":3}}"#,
    );
    assert_eq!(run(&["render"], &cfg, &dir.path().join("out")), EXIT_CONFIG);
}
