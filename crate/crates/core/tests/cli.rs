use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/specs")
        .join(name)
        .display()
        .to_string()
}

fn thermoscope(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermoscope"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("THERMOSCOPE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap()
}

fn data_rows(p: PathBuf) -> Vec<Vec<String>> {
    std::fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn pressure_writes_curve_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (m, p) = (spec("doubling.json"), spec("geometric.json"));
    let out = thermoscope(
        &["pressure", "--map", &m, "--potential", &p, "--t-min", "-2", "--t-max", "2", "--t-samples", "9", "--ulam-n", "64"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("pressure_curve.csv")).unwrap();
    assert!(text.starts_with("# config: {"));
    assert_eq!(
        text.lines().nth(1).unwrap(),
        "t,P_norm_growth,P_ulam,P_reconciled,d1,d2,zone,confidence"
    );
    let rows = data_rows(dir.path().join("pressure_curve.csv"));
    assert_eq!(rows.len(), 9);
    for r in &rows {
        let t: f64 = r[0].parse().unwrap();
        let p: f64 = r[3].parse().unwrap();
        assert!((p - (1.0 - t) * 2f64.ln()).abs() < 1e-12);
    }
    let summary = read_json(dir.path().join("summary.json"));
    assert!((summary["P0"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert!(summary["P1"].as_f64().unwrap().abs() < 1e-12);
    assert!(summary["warnings"].is_array());
}

#[test]
fn transitions_for_intermittent_map() {
    let dir = tempfile::tempdir().unwrap();
    let (m, p) = (spec("mp_alpha1.json"), spec("geometric.json"));
    let out = thermoscope(
        &["transitions", "--map", &m, "--potential", &p, "--t-min", "-1", "--t-max", "3", "--t-samples", "21", "--ulam-n", "256"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(dir.path().join("transitions.json"))["report"].clone();
    assert_eq!(report["t1"], "-inf");
    let t2 = report["t2"].as_f64().unwrap();
    assert!((0.8..1.2).contains(&t2), "t2 = {t2}");
    let gap = std::fs::read_to_string(dir.path().join("gap_sweep.csv")).unwrap();
    assert!(gap.lines().any(|l| l == "t,lambda1,abs_lambda2,ratio,ess_bound,certificate"));
}

#[test]
fn cohomologous_potential_has_null_transitions() {
    let dir = tempfile::tempdir().unwrap();
    let (m, p) = (spec("slopes_2_4_4.json"), spec("constant.json"));
    let out = thermoscope(&["transitions", "--map", &m, "--potential", &p, "--ulam-n", "64"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = read_json(dir.path().join("transitions.json"))["report"].clone();
    assert!(report["t1"].is_null() && report["t2"].is_null());
    assert_eq!(report["cohomologous"], true);
}

#[test]
fn spectrum_records_bad_intervals_as_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let (m, p) = (spec("doubling.json"), spec("indicator_right_half.json"));
    let out = thermoscope(
        &[
            "spectrum", "--map", &m, "--potential", &p, "--ulam-n", "64", "--interval", "0.4,0.6", "--interval",
            "1.5,2", "--interval", "0.25,0.25",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let s = read_json(dir.path().join("spectrum.json"));
    let iv = s["intervals"].as_array().unwrap();
    assert_eq!(iv.len(), 3);
    assert_eq!(iv[0]["region"], "delta2");
    assert!(iv[0]["ld"].as_f64().unwrap().abs() < 1e-12);
    assert!(iv[1]["error"].is_string());
    let h = |s: f64| -(s * s.ln() + (1.0 - s) * (1.0 - s).ln());
    assert!((iv[2]["h_x"].as_f64().unwrap() - h(0.25)).abs() < 1e-2);
    assert!(s["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("[1.5, 2]")));
    let rows = data_rows(dir.path().join("rate.csv"));
    assert!(rows.iter().all(|r| r.len() == 4));
}

#[test]
fn map_table_rows_and_break_points() {
    let dir = tempfile::tempdir().unwrap();
    let m = spec("slopes_2_4_4.json");
    let out = thermoscope(&["map-table", "--map", &m, "--samples", "10"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let rows = data_rows(dir.path().join("map.csv"));
    // 10 uniform samples; the break points 0 and 1/2 coincide with samples, 3/4 does not.
    assert_eq!(rows.len(), 11);
    let breaks: Vec<f64> = rows.iter().filter(|r| r[4] == "true").map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(breaks, vec![0.0, 0.5, 0.75]);
    let zero = &rows[0];
    assert_eq!(zero[2].parse::<f64>().unwrap(), 4.0);
    assert_eq!(zero[3].parse::<f64>().unwrap(), 2.0);

    let out = thermoscope(&["map-table", "--map", &m, "--format", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(dir.path().join("map.json"));
    // 1/2 and 3/4 are not multiples of 1/1001.
    assert_eq!(v["rows"].as_array().unwrap().len(), 1001 + 2);
}

#[test]
fn spectral_report_dump() {
    let dir = tempfile::tempdir().unwrap();
    let (m, p) = (spec("cubic_pair.json"), spec("trig.json"));
    let out = thermoscope(
        &["spectral-report", "--map", &m, "--potential", &p, "--ulam-n", "32", "--t", "0.5", "--t", "1", "--dump"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(dir.path().join("spectral_report.json"));
    assert_eq!(r["reports"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("ulam_matrix.csv").exists());
    assert!(dir.path().join("eigenvectors.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (m, g) = (spec("doubling.json"), spec("geometric.json"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"type\": \"linear_full_branch\",\n  \"slopes\": [2, 2,]\n}").unwrap();
    let out = thermoscope(&["pressure", "--map", bad.to_str().unwrap(), "--potential", &g], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3 column"), "{err}");

    let slow = dir.path().join("slow.json");
    std::fs::write(&slow, r#"{"type": "linear_full_branch", "slopes": [2, 0.5]}"#).unwrap();
    let out = thermoscope(&["map-table", "--map", slow.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let out = thermoscope(&["pressure", "--map", &m, "--potential", &g, "--t-min", "1", "--t-max", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = thermoscope(&["pressure", "--map", &m], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = thermoscope(&["pressure", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    let huge = dir.path().join("huge.json");
    std::fs::write(&huge, r#"{"type": "trig_series", "cos": [0, 1e300]}"#).unwrap();
    let out = thermoscope(
        &["pressure", "--map", &m, "--potential", huge.to_str().unwrap(), "--ulam-n", "16"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));

    let out = thermoscope(
        &["transitions", "--map", &spec("slopes_2_4_4.json"), "--potential", &spec("trig.json"), "--max-period", "40", "--ulam-n", "16"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (m, p) = (spec("mp_alpha1.json"), spec("trig.json"));
    let args = ["transitions", "--map", &m, "--potential", &p, "--t-min", "-1", "--t-max", "1", "--t-samples", "9", "--ulam-n", "128"];
    for dir in [&a, &b] {
        let out = Command::new(env!("CARGO_BIN_EXE_thermoscope"))
            .args(args)
            .arg("--out")
            .arg(a.path())
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        for f in ["transitions.json", "gap_sweep.csv"] {
            std::fs::rename(a.path().join(f), dir.path().join(format!("kept_{f}"))).unwrap();
        }
    }
    for f in ["kept_transitions.json", "kept_gap_sweep.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}
