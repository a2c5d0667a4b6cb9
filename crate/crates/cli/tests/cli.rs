use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;
use twistfock_cli::report::Report;

const QFLIP: &str = r#"
[subspace]
tracial = 2

[twist]
kind = "q-flip"
q = 0.5

[input]
word = [1, 2, 2, 1]
index = 2
"#;

const IDENTITY: &str = r#"
[subspace]
tracial = 2

[twist]
kind = "raw"
matrix = [
  [[1, 0], [0, 0], [0, 0], [0, 0]],
  [[0, 0], [1, 0], [0, 0], [0, 0]],
  [[0, 0], [0, 0], [1, 0], [0, 0]],
  [[0, 0], [0, 0], [0, 0], [1, 0]],
]

[input]
word = [1, 2]
"#;

const FREE: &str = r#"
[subspace]
eigenvalues = [2.0, 0.5]
involution = [2, 1]
mode = "real-orthonormal"

[twist]
kind = "zero"

[numerics]
series_order = 3
"#;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// Runs the binary with `--out`, returning the exit code and the parsed report if one was written.
fn run(cmd: &str, config: &Path, extra: &[&str]) -> (i32, Option<Report>) {
    let out = config.with_extension(format!("{cmd}.json"));
    let _ = std::fs::remove_file(&out);
    let status = Command::new(env!("CARGO_BIN_EXE_twistfock"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(&out).ok().map(|s| serde_json::from_str(&s).unwrap());
    (status.status.code().unwrap(), report)
}

fn flag(r: &Report, name: &str) -> bool {
    r.validation.as_ref().unwrap()[name]["pass"].as_bool().unwrap()
}

#[test]
fn validate_q_flip_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "q.toml", QFLIP);
    let (code, r) = run("validate", &cfg, &[]);
    let r = r.unwrap();
    assert_eq!(code, 0);
    assert_eq!(r.results["all_pass"], Value::Bool(true));
    for f in ["self_adjoint", "norm_lt_one", "braided", "compatible", "crossing_symmetric", "strictly_positive"] {
        assert!(flag(&r, f), "{f}");
    }
}

#[test]
fn identity_twist_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "id.toml", IDENTITY);
    let (code, r) = run("validate", &cfg, &[]);
    let r = r.unwrap();
    assert_eq!(code, 2);
    assert!(!flag(&r, "crossing_symmetric"));
    assert!(flag(&r, "braided"));

    let (code, r) = run("wick", &cfg, &[]);
    assert_eq!(code, 2);
    assert!(r.unwrap().results.get("refused").is_some());
    let (code, r) = run("wick", &cfg, &["--force"]);
    assert_eq!(code, 0);
    assert!(!flag(r.as_ref().unwrap(), "crossing_symmetric"));
    assert!(r.unwrap().results["terms"].is_array());
}

#[test]
fn conjugate_without_twist_is_the_dual_basis() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "free.toml", FREE);
    let (code, r) = run("conjugate", &cfg, &[]);
    assert_eq!(code, 0);
    let r = r.unwrap();
    assert_eq!(r.results["tail_bound"].as_f64(), Some(0.0));
    // Fisher is Σ‖f_i‖², read off level 1
    let xi = r.results["xi"].as_array().unwrap();
    let mut expected = 0.0;
    for x in xi {
        let lvl1: Vec<f64> = x["levels"]["1"].as_array().unwrap().iter().flat_map(|z| {
            let z = z.as_array().unwrap();
            [z[0].as_f64().unwrap(), z[1].as_f64().unwrap()]
        }).collect();
        expected += lvl1.iter().map(|v| v * v).sum::<f64>();
        for n in ["3", "5", "7"] {
            assert!(x["levels"][n].as_array().unwrap().iter().all(|z| z[0] == 0.0 && z[1] == 0.0));
        }
    }
    let fisher = r.results["fisher_value"].as_f64().unwrap();
    assert!((fisher - expected).abs() < 1e-12);
    assert!(fisher > 2.0);
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "q.toml", QFLIP);
    for cmd in ["gram", "wick", "moments", "dq", "fisher", "type", "noninjectivity"] {
        let (c1, a) = run(cmd, &cfg, &[]);
        let (c2, b) = run(cmd, &cfg, &[]);
        assert_eq!((c1, c2), (0, 0), "{cmd}");
        let (a, b) = (a.unwrap(), b.unwrap());
        assert_eq!(a.without_timings(), b.without_timings(), "{cmd}");
        let again: Report = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(again, a, "{cmd}");
    }
}

#[test]
fn moments_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "q.toml", QFLIP);
    // only the nested pairing of x1 x2 x2 x1 contributes
    let (_, r) = run("moments", &cfg, &[]);
    let m = &r.unwrap().results["moments"][0]["moment"];
    assert!((m[0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (_, r) = run("gram", &cfg, &["--truncation", "2", "--tolerance", "1e-9"]);
    let r = r.unwrap();
    assert_eq!(r.results["levels"].as_array().unwrap().len(), 3);
    assert_eq!(r.inputs["numerics"]["tolerance"].as_f64(), Some(1e-9));
}

#[test]
fn transport_verdict_needs_a_threshold() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "free.toml", FREE);
    let (code, r) = run("transport", &cfg, &["--R", "1.5"]);
    assert_eq!(code, 0);
    assert!(r.unwrap().results["below_threshold"].is_null());
    let (code, r) = run("transport", &cfg, &["--R", "1.5", "--C-R", "0.1"]);
    assert_eq!(code, 0);
    assert_eq!(r.unwrap().results["below_threshold"], Value::Bool(true));
}

#[test]
fn errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "q.toml", QFLIP);
    assert_eq!(run("integrate", &cfg, &[]).0, 1);
    let bad = write(&dir, "bad.toml", "[subspace]\ntracial = 2\n[twist]\nkind = \"q-flip\"\n");
    assert_eq!(run("validate", &bad, &[]).0, 1);
    let typo = write(&dir, "typo.toml", &QFLIP.replace("tracial", "tracal"));
    assert_eq!(run("validate", &typo, &[]).0, 1);
    let cfg = write(&dir, "r.toml", FREE);
    assert_eq!(run("transport", &cfg, &["--R", "1.0"]).0, 1);
    assert_eq!(run("noninjectivity", &cfg, &[]).0, 0);
}
