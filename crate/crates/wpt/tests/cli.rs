use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn wpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpt")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn stderr_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn curve_csv_is_monotone_with_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = wpt(&[
        "curve",
        "--waveform",
        "gaussian",
        "--q-min",
        "1e-6",
        "--q-max",
        "1",
        "--points",
        "200",
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["q_rf_w", "u_inv_w", "i_out_a", "p_dc_w"]);
    let p: Vec<f64> = rdr.records().map(|r| r.unwrap()[3].parse().unwrap()).collect();
    assert_eq!(p.len(), 200);
    assert!(p.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn check_convexity_columns_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cvx.csv");
    let report = dir.path().join("cvx.json");
    let o = wpt(&["check-convexity", "--points", "50", "--out", path_str(&out), "--report", path_str(&report)]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["q_rf_w", "u_inv_w", "i_out_a", "p_dc_w", "second_diff", "cond9", "cond14"]
    );
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["verdict"]["p_dc_convex"], true);
    assert_eq!(v["config"]["diode"]["r_load"], 5000.0);
    assert_eq!(v["config"]["waveform"], "cw");
}

#[test]
fn brute_half_metre_on_five_metre_box_is_11_by_11() {
    let o = wpt(&["brute", "--scenario", &fixture("five_receivers.json"), "--resolution", "0.5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!((v["nx"].as_u64(), v["ny"].as_u64()), (Some(11), Some(11)));
    assert_eq!(v["result"]["cells"], 121);
    assert_eq!(v["config"]["scenario"]["receivers"].as_array().unwrap().len(), 5);
}

#[test]
fn compare_reports_a_common_end_point() {
    let dir = tempfile::tempdir().unwrap();
    let scen = dir.path().join("s.json");
    assert!(wpt(&["gen-scenario", "--receivers", "5", "--seed", "3", "--out", path_str(&scen)]).status.success());
    let o = wpt(&["compare", "--scenario", path_str(&scen), "--resolution", "0.05"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["final_distance_m"].as_f64().unwrap() <= 1e-4);
    assert_eq!(v["config"]["bad_init"], "near-receiver:0");
    let obj = v["ini_bad"]["objectives_w"].as_array().unwrap();
    assert!(obj.windows(2).all(|w| w[1].as_f64() >= w[0].as_f64()));
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| -> (Vec<u8>, Vec<u8>) {
        let scen: PathBuf = dir.path().join(format!("s{tag}.json"));
        let rep: PathBuf = dir.path().join(format!("r{tag}.json"));
        assert!(wpt(&["gen-scenario", "--receivers", "4", "--seed", "11", "--out", path_str(&scen)]).status.success());
        let o = wpt(&["position", "--scenario", path_str(&scen), "--init", "near-receiver:2", "--out", path_str(&rep)]);
        assert!(o.status.success());
        (std::fs::read(&scen).unwrap(), std::fs::read(&rep).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn exit_codes_and_error_records() {
    let o = wpt(&["curve", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_record(&o)["kind"], "validation");

    let o = wpt(&["brute", "--scenario", &fixture("negative_lambda4.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_record(&o)["line"], 5);

    let o = wpt(&["brute", "--scenario", &fixture("five_receivers.json"), "--resolution", "0.001"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_record(&o)["kind"], "grid_refused");

    let o = wpt(&[
        "position",
        "--scenario",
        &fixture("five_receivers.json"),
        "--init",
        "near-receiver:0",
        "--max-iters",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_record(&o)["kind"], "non_convergence");

    let o = wpt(&["position", "--scenario", &fixture("five_receivers.json"), "--init", "9,9"]);
    assert_eq!(o.status.code(), Some(2));

    let o = wpt(&["position"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn overrides_reach_the_resolved_config() {
    let o = wpt(&[
        "position",
        "--scenario",
        &fixture("minimal.json"),
        "--r-load",
        "1000",
        "--waveform",
        "4:2.0",
        "--tol",
        "1e-4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["scenario"]["diode"]["r_load"], 1000.0);
    assert_eq!(v["config"]["scenario"]["waveform"]["4"], 2.0);
    assert_eq!(v["config"]["sia"]["rel_tol"], 1e-4);
}
