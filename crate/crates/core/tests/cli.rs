use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn discriminator(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discriminator"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = discriminator(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

#[test]
fn generated_weak_pump_spectrum_reads_as_eit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "weak.csv");
    let gen = ok_json(&["generate", "--omega", "0.2", "--output", &csv]);
    assert_eq!(gen["spectrum"]["n_points"], 201);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("delta,value,sigma\n"));

    let report = path(dir.path(), "report.json");
    let r = ok_json(&["discriminate", "--input", &csv, "--output", &report]);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["selection"]["verdict"], "Eit");
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(saved, r);
}

#[test]
fn circuit_preset_reads_as_ats() {
    let r = ok_json(&["circuit"]);
    assert_eq!(r["selection"]["verdict"], "Ats");
    assert_eq!(r["grid"], "-30:30:0.25");
    assert_eq!(r["spectrum"]["n_points"], 241);
    let w = r["selection"]["models"][0]["per_point_weight"].as_f64().unwrap();
    assert!((w - 0.03).abs() < 0.02, "{w}");
}

#[test]
fn sweep_table_brackets_the_crossover() {
    let dir = tempfile::tempdir().unwrap();
    let table = path(dir.path(), "sweep.csv");
    let r = ok_json(&["sweep", "--omegas", "0.7:1.0:0.05", "--output", &table]);
    let x = r["sweep"]["crossover"].as_f64().unwrap();
    assert!((x - 0.86).abs() < 0.05, "{x}");
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("omega,per_point_eit,per_point_ats,akaike_eit,akaike_ats,failures\n"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn fit_selects_models() {
    let r = ok_json(&["fit", "--omega", "2", "--model", "ats", "--starts", "4"]);
    assert_eq!(r["fits"].as_array().unwrap().len(), 1);
    assert_eq!(r["fits"][0]["model"], "ATS");
}

#[test]
fn errors_are_reported_as_json_with_failure_status() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(dir.path(), "bad.csv");
    std::fs::write(&bad, "delta,value\n0,1\n1,x\n2,1\n3,1\n4,1\n").unwrap();
    let out = discriminator(&["discriminate", "--input", &bad]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["status"], "error");
    assert!(err["error"].as_str().unwrap().contains("line 3"));

    let out = discriminator(&["generate", "--omega", "-1", "--output", &path(dir.path(), "x.csv")]);
    assert!(!out.status.success());
    assert!(!dir.path().join("x.csv").exists());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["discriminate", "--omega", "0.5", "--sigma", "0.05", "--seed", "11", "--replicate", "3"];
    let a = discriminator(&args);
    let b = discriminator(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
