use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn willmore(config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.conf");
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

const CAP: &str = "command = energy
resolutions = 1/32, 1/64, 1/128, 1/256

[domain]
shape = disk
radius = 0.5

[field]
family = sphere_cap
radius = 1
";

#[test]
fn energy_of_sphere_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CAP);
    let out = dir.path().join("out");
    let o = willmore(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("energy.json"));
    assert_eq!(report["command"], "energy");
    assert_eq!(report["grids"].as_array().unwrap().len(), 4);
    let rows = report["results"].as_array().unwrap();
    let w0 = rows.last().unwrap()["report"]["W0"].as_f64().unwrap();
    let exact = 2.0 * std::f64::consts::PI * (1.0 - 0.75f64.sqrt());
    assert!((w0 - exact).abs() / exact < 1e-3, "{}", w0);
    let csv = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn resolutions_override_replaces_the_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CAP);
    let out = dir.path().join("out");
    let o = willmore(&cfg, &out, &["--resolutions", "1/16,1/32"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("energy.json"));
    let hs: Vec<f64> = report["grids"].as_array().unwrap().iter().map(|g| g["h"].as_f64().unwrap()).collect();
    assert_eq!(hs, vec![1.0 / 16.0, 1.0 / 32.0]);
}

#[test]
fn negative_spacing_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "command = energy\nh = -0.01\n");
    let o = willmore(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("h:"), "{}", err);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "command = energy\n[field]\nfamily = zero\ncolour = red\n");
    let o = willmore(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn verify_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "command = verify\nseed = 3\nresolutions = 1/32, 1/64\n\n[verify]\nrandom_fields = 10\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = willmore(&cfg, out, &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    }
    for f in ["verify.json", "verify.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{}", f);
    }
    let report = json(&a.join("verify.json"));
    assert_eq!(report["seed"], 3);
}

#[test]
fn seed_override_changes_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "command = verify\nresolutions = 1/32, 1/64\n\n[verify]\nrandom_fields = 2\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(willmore(&cfg, &a, &["--seed", "1"]).status.success());
    assert!(willmore(&cfg, &b, &["--seed", "2"]).status.success());
    let (ja, jb) = (json(&a.join("verify.json")), json(&b.join("verify.json")));
    assert_ne!(ja["config_hash"], jb["config_hash"]);
    assert_eq!(ja["seed"], 1);
}

#[test]
fn numerical_failure_writes_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    // Curvature of this field overflows.
    let cfg = write_config(dir.path(), "command = energy\nh = 1/16\n\n[field]\nfamily = gaussian\namplitude = 1e300\nwidth = 1e-3\n");
    let out = dir.path().join("out");
    let o = willmore(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let diag = json(&out.join("diagnostics.json"));
    assert!(diag.get("error").is_some(), "{}", diag);
}
