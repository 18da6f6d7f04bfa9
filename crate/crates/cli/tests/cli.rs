use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

use gausep::linalg::Mat;
use gausep::sweep::SweepSpec;
use gausep::SystemModel;

fn gausep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gausep")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn free_model(k: f64, s_a: f64, s_b: f64) -> Value {
    serde_json::to_value(SystemModel::position_coupled(Mat::zeros(2, 2), k, s_a, s_b, 0.0).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(p).unwrap();
    rdr.records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn threshold_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let saturated = write(dir.path(), "sat.json", &json!({ "model": free_model(0.1, 0.1, 0.1) }));
    let o = gausep(&["threshold", "--config", saturated.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verdicts"][0]["margin"], json!(0.0));
    assert_eq!(report["verdicts"][0]["bound"], json!("rank1"));

    let violated = write(dir.path(), "vio.json", &json!({ "model": free_model(0.2, 0.1, 0.1) }));
    assert_eq!(code(&gausep(&["threshold", "--config", violated.to_str().unwrap()])), 2);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"model\": {\n    \"layout\": 3,\n").unwrap();
    let o = gausep(&["threshold", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&gausep(&["threshold", "--config", missing.to_str().unwrap()])), 1);
}

#[test]
fn threshold_report_for_scenario_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sc.json",
        &json!({
            "scenario": { "kind": "two_mass", "mass_kg": 1.0, "separation_m": 0.0464,
                          "damping_rate_per_s": 1e-10, "temperature_k": 1e-9 },
            "omega_rad_s": 1.0,
        }),
    );
    let out = dir.path().join("report.json");
    let o = gausep(&["threshold", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["si"]["entanglement_possible"], json!(true));
    assert_eq!(code(&o), 2);
}

#[test]
fn evolve_series_columns() {
    let dir = tempfile::tempdir().unwrap();
    let noiseless = write(dir.path(), "n.json", &json!({ "model": free_model(0.5, 0.0, 0.0), "t": 1.0 }));
    let out = dir.path().join("n.csv");
    let o = gausep(&["evolve", "--config", noiseless.to_str().unwrap(), "--steps", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let header = fs::read_to_string(&out).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "t,nu_tilde_minus,log_negativity,physical");
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 11);
    let (t, nu, ln) = (column(&rows, 0), column(&rows, 1), column(&rows, 2));
    assert_eq!(t[0], 0.0);
    assert!((nu[0] - 0.5).abs() < 1e-14);
    assert_eq!(ln[0], 0.0);
    assert!(ln.windows(2).all(|w| w[1] >= w[0]));
    assert!(ln[10] > 0.01);
    assert!(rows.iter().all(|r| r[3] == "1"));

    let saturated = write(dir.path(), "s.json", &json!({ "model": free_model(0.2, 0.2, 0.2), "t": 0.5 }));
    let out = dir.path().join("s.csv");
    gausep(&["evolve", "--config", saturated.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(column(&csv_rows(&out), 2).iter().all(|&x| x < 1e-9));
}

#[test]
fn locc_verify_rank1() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.json", &json!({ "model": free_model(0.1, 0.2, 0.1), "t": 1.0 }));
    let o = gausep(&["locc-verify", "--config", ok.to_str().unwrap(), "--dt", "0.1"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["generator_residual"].as_f64().unwrap() < 1e-12);

    let infeasible = write(dir.path(), "no.json", &json!({ "model": free_model(0.3, 0.2, 0.1) }));
    let o = gausep(&["locc-verify", "--config", infeasible.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["feasible"], json!(false));
}

#[test]
fn locc_verify_general_two_plus_two() {
    let dir = tempfile::tempdir().unwrap();
    let id = |n: usize| (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect::<Vec<Vec<f64>>>();
    let mut q_g = vec![vec![0.0; 4]; 4];
    q_g[0][0] = 0.3;
    q_g[1][2] = -0.2;
    q_g[2][1] = 0.25;
    q_g[3][3] = 0.1;
    let mut m_b = id(4);
    m_b[0][0] = 1.5;
    m_b[1][1] = 1.5;
    let cfg = write(
        dir.path(),
        "g.json",
        &json!({
            "model": {
                "layout": { "n_a": 2, "n_b": 2 },
                "m_a": id(4), "m_b": m_b,
                "coupling": { "kind": "general", "q_g": q_g },
                "noise": { "kind": "matrix_white", "q_a": id(4), "q_b": id(4) },
            },
            "t": 1.0,
        }),
    );
    let o = gausep(&["locc-verify", "--config", cfg.to_str().unwrap(), "--dt", "0.05"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(report["generator_residual"].as_f64().unwrap() < 1e-12);
    assert!(report["trotter_order"].as_f64().unwrap() >= 1.0 - 1e-3, "{report}");
}

fn sweep_config(dir: &Path) -> PathBuf {
    write(
        dir,
        "sweep.json",
        &json!({
            "model": free_model(0.1, 0.1, 0.1),
            "t": 0.2,
            "sweep": {
                "axes": [
                    { "path": "model.coupling.k_g", "min": 0.01, "max": 1.0, "points": 3, "scale": "log" },
                    { "path": "model.noise.s_a", "min": 0.1, "max": 0.2, "points": 2 },
                ],
                "outputs": ["margin", "nu_tilde_minus", "log_negativity", "feasibility"],
            },
        }),
    )
}

#[test]
fn sweep_grid_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path());
    let outs: Vec<String> = ["1", "2", "0"]
        .iter()
        .map(|jobs| {
            let out = dir.path().join(format!("grid{jobs}.csv"));
            let o = gausep(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs]);
            assert_eq!(code(&o), 0);
            assert!(!out.with_extension("csv.ckpt").exists());
            fs::read_to_string(out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);

    let rows = csv_rows(&dir.path().join("grid1.csv"));
    assert_eq!(rows.len(), 6);
    let k = column(&rows, 1);
    assert_eq!((k[0], k[4]), (0.01, 1.0));
    assert!((k[2] / k[0] - k[4] / k[2]).abs() < 1e-12);
    assert_eq!(column(&rows, 0), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
}

#[test]
fn sweep_spec_from_separate_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "base.json", &json!({ "model": free_model(0.1, 0.1, 0.1) }));
    let spec = write(
        dir.path(),
        "spec.json",
        &json!({
            "axes": [
                { "path": "model.coupling.k_g", "min": 0.05, "max": 0.2, "points": 2 },
                { "path": "model.noise.s_b", "min": 0.1, "max": 0.3, "points": 2 },
            ],
            "outputs": ["margin"],
        }),
    );
    let out = dir.path().join("g.csv");
    let o = gausep(&["sweep", "--config", cfg.to_str().unwrap(), "--sweep", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&out).len(), 4);
}

#[test]
fn sweep_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path());
    let out = dir.path().join("grid.csv");
    let run = || gausep(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run()), 0);
    let reference = fs::read_to_string(&out).unwrap();

    // Three rows done, a fourth half-written, and a marker proving the done rows are kept.
    let mut lines: Vec<String> = reference.lines().take(4).map(str::to_string).collect();
    lines[1].push_str("kept");
    lines.push("3,1.0e0".into());
    fs::write(&out, lines.join("\n") + "\n").unwrap();
    let mut base: Value = serde_json::from_str(&fs::read_to_string(&cfg).unwrap()).unwrap();
    let spec: SweepSpec = serde_json::from_value(base["sweep"].take()).unwrap();
    base.as_object_mut().unwrap().remove("sweep");
    let fingerprint = json!({ "config": base, "sweep": spec }).to_string();
    let ckpt = dir.path().join("grid.csv.ckpt");
    fs::write(&ckpt, json!({ "fingerprint": fingerprint, "rows_done": 3 }).to_string()).unwrap();

    assert_eq!(code(&run()), 0);
    let resumed = fs::read_to_string(&out).unwrap();
    let expected: Vec<String> = reference
        .lines()
        .enumerate()
        .map(|(i, l)| if i == 1 { format!("{l}kept") } else { l.to_string() })
        .collect();
    assert_eq!(resumed, expected.join("\n") + "\n");
    assert!(!ckpt.exists());

    // A checkpoint from another sweep is ignored.
    fs::write(&ckpt, json!({ "fingerprint": "other", "rows_done": 5 }).to_string()).unwrap();
    assert_eq!(code(&run()), 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), reference);
}

#[test]
fn sweep_rejects_bad_spec() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        &json!({
            "model": free_model(0.1, 0.1, 0.1),
            "sweep": { "axes": [{ "path": "t", "min": 1.0, "max": 0.5, "points": 3 }], "outputs": ["margin"] },
        }),
    );
    let out = dir.path().join("x.csv");
    assert_eq!(code(&gausep(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 1);
}
