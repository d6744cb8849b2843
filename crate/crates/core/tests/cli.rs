mod common;

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn pbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbounds")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pbounds-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn bounds2d_writes_csv_json_and_svg() {
    let dir = scratch("b2");
    let out = pbounds(&["bounds2d", "--rho", "1", "--alpha-grid", "pi/4:3pi/4:3", "--N", "3", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("bounds2d.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("alpha,rho,lower_CP_T,upper_CP_MR"));
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[5] <= v[6] && v[7] <= v[8], "{line}");
    }
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("bounds2d.json")).unwrap()).unwrap();
    assert_eq!(json["schema"], "poincare-bounds/1");
    assert_eq!(json["data"]["rows"].as_array().unwrap().len(), 3);
    assert!(fs::read_to_string(dir.join("bounds2d.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn invalid_input_exits_with_code_two() {
    let out = pbounds(&["bounds2d", "--alpha-grid", "0:pi/2:3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("(0, pi)"));
    let out = pbounds(&["bounds2d", "--N", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eigenfunction_sampling_is_normalized() {
    let dir = scratch("ef");
    let out = pbounds(&[
        "eigenfunction", "--alpha", "pi/2", "--kind", "ctr-gamma", "--N", "4", "--resolution", "6", "--svg", "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("eigenfunction.csv")).unwrap();
    let values: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 28);
    assert!(values.iter().any(|&v| v == 1.0) && values.iter().all(|v| v.abs() <= 1.0));
    assert!(dir.join("eigenfunction.svg").exists());
}

#[test]
fn majorant_report_and_rejection() {
    let dir = scratch("mj");
    let mesh = dir.join("mesh.json");
    fs::write(&mesh, serde_json::to_string(&common::square_mesh()).unwrap()).unwrap();
    let good = dir.join("good.json");
    fs::write(&good, serde_json::to_string(&common::exact_fields()).unwrap()).unwrap();
    let report = dir.join("report.json");
    let args = |fields: &PathBuf| {
        vec!["majorant".to_string(), "--mesh".into(), mesh.display().to_string(), "--fields".into(), fields.display().to_string(), "--out".into(), report.display().to_string()]
    };
    let out = Command::new(env!("CARGO_BIN_EXE_pbounds")).args(args(&good)).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["data"]["total"].as_f64().unwrap() < 1e-12);

    let mut fields = common::exact_fields();
    fields.q[0][0].push((0, 0, 0.3));
    let bad = dir.join("bad.json");
    fs::write(&bad, serde_json::to_string(&fields).unwrap()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_pbounds")).args(args(&bad)).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("edge 4: mean normal flux jump"));
}

#[test]
fn table_one_and_its_diff() {
    let dir = scratch("t1");
    let out = pbounds(&["tables", "--id", "1", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(dir.join("table1.csv")).unwrap().lines().count(), 7);
    assert_eq!(fs::read_to_string(dir.join("table1_diff.csv")).unwrap().lines().count(), 25);
}
