use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mwc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mwc-lab"))
        .args(args)
        .env_remove("MWC_LAB_THREADS")
        .output()
        .expect("spawn mwc-lab")
}

fn stdout_json(args: &[&str]) -> Value {
    let out = mwc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rd = csv::Reader::from_reader(text);
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn gen_writes_pattern_file_header() {
    let dir = tempfile::tempdir().unwrap();
    let pat = dir.path().join("g.pat");
    let out = mwc(&[
        "gen",
        "--family",
        "gold",
        "--n",
        "9",
        "--m",
        "80",
        "--out",
        path_str(&pat),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&pat).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("80 511 gold "));
    assert_eq!(lines.count(), 80);
}

#[test]
fn exrip_from_pattern_file_matches_table() {
    let dir = tempfile::tempdir().unwrap();
    let pat = dir.path().join("g.pat");
    assert!(mwc(&[
        "gen",
        "--family",
        "gold",
        "--n",
        "9",
        "--m",
        "80",
        "--out",
        path_str(&pat)
    ])
    .status
    .success());
    let v = stdout_json(&[
        "exrip",
        "--patterns",
        path_str(&pat),
        "--k",
        "24",
        "--delta",
        "0.41421356",
        "--dist",
        "complex-normal",
    ]);
    assert_eq!(v["bound"], "exrip");
    let p = v["probability"].as_f64().unwrap();
    assert!((p - 0.939).abs() < 0.002, "{p}");
    for key in ["raw_value", "feasible", "params"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn verify_preset_passes_bound_check() {
    let v = stdout_json(&[
        "verify",
        "--preset",
        "table2_gold",
        "--trials",
        "100000",
        "--seed",
        "7",
    ]);
    assert_eq!(v["verdicts"]["bound_holds"], true);
    assert_eq!(v["estimate"]["trials"], 100000);
    assert_eq!(v["m"], 80);
    assert_eq!(v["M"], 511);
}

#[test]
fn measures_and_bounds_schemas() {
    let m = stdout_json(&["measures", "--preset", "table2_kasami"]);
    for key in [
        "alpha",
        "beta",
        "gamma",
        "mu",
        "spectral_norm_sq",
        "m",
        "M",
        "zero_columns",
    ] {
        assert!(m["quality"].get(key).is_some(), "missing quality.{key}");
    }
    assert_eq!(m["slacks"].as_object().unwrap().len(), 8);
    assert!(m["welch_bound"].as_f64().unwrap() > 0.0);

    let b = stdout_json(&[
        "bounds",
        "--family",
        "random",
        "--M",
        "195",
        "--m",
        "40",
        "--k",
        "12",
        "--samples",
        "100000",
        "--c",
        "0.5",
    ]);
    assert!(b["coherence"]["candes_plan"].is_object());
    let names: Vec<&str> = b["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["bound"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["calderbank", "gan", "tropp_strip", "exrip", "exrip_approx"]
    );
    assert_eq!(b["rip_satisfied"], false);
    let without_c = stdout_json(&[
        "bounds",
        "--family",
        "random",
        "--M",
        "195",
        "--m",
        "40",
        "--k",
        "12",
        "--samples",
        "100000",
    ]);
    assert!(without_c["coherence"]["candes_plan"].is_null());
}

#[test]
fn table_and_sweep_csv_schemas() {
    let t2 = mwc(&["table2", "--presets", "table2_kasami,table2_gold"]);
    assert!(t2.status.success());
    let (header, rows) = csv_rows(&t2.stdout);
    assert_eq!(
        header,
        [
            "family",
            "m",
            "M",
            "2K",
            "alpha_x100",
            "beta_x100",
            "gamma_x100",
            "p_normal",
            "p_uniform",
            "status"
        ]
    );
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "gold");
    assert!(rows.iter().all(|r| r[9] == "ok"));
    // three decimals everywhere
    assert!(rows.iter().all(|r| r[4..9]
        .iter()
        .all(|x| x.split('.').nth(1).unwrap().len() == 3)));

    let sw = mwc(&[
        "sweep",
        "--m-min",
        "20",
        "--m-max",
        "30",
        "--samples",
        "100000",
    ]);
    assert!(sw.status.success());
    let (header, rows) = csv_rows(&sw.stdout);
    assert_eq!(header, ["m", "p_exact", "p_approx"]);
    assert_eq!(rows.len(), 11);

    let t1 = mwc(&["table1", "--attempts", "2", "--ceiling", "256"]);
    assert!(t1.status.success());
    let (header, rows) = csv_rows(&t1.stdout);
    assert_eq!(header[..4], ["bound", "K", "target_p", "m"]);
    let cp = rows.iter().find(|r| r[0] == "candes_plan").unwrap();
    assert_eq!(cp[3], "n/a");

    let json = stdout_json(&[
        "table1",
        "--attempts",
        "2",
        "--ceiling",
        "256",
        "--c",
        "0.1",
        "--format",
        "json",
    ]);
    assert_eq!(json["params"]["candes_plan_c"], 0.1);
    assert!(json["rows"].as_array().unwrap().len() >= 9);
}

#[test]
fn recover_writes_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("trials.csv");
    let v = stdout_json(&[
        "recover",
        "--preset",
        "mmv_gold_standard",
        "--trials",
        "30",
        "--csv",
        path_str(&csv_path),
    ]);
    assert_eq!(v["trials"], 30);
    let rate = v["success_rate"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&rate));
    let (header, rows) = csv_rows(&std::fs::read(&csv_path).unwrap());
    assert_eq!(header[0], "trial");
    assert_eq!(rows.len(), 30);
}

#[test]
fn record_is_separate_from_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let rec = dir.path().join("rec.json");
    let o = mwc(&[
        "measures",
        "--preset",
        "table2_kasami",
        "--out",
        path_str(&out),
        "--record",
        path_str(&rec),
    ]);
    assert!(o.status.success());
    let record: Value = serde_json::from_slice(&std::fs::read(&rec).unwrap()).unwrap();
    let artifact: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(record["outputs"][0], artifact);
    assert_eq!(record["preset"], "table2_kasami");
    assert_eq!(record["seed"], 1);
    assert!(record["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert!(record["command"].as_array().unwrap().len() >= 3);
}

fn assert_usage_error(args: &[&str], env_threads: Option<&str>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mwc-lab"));
    cmd.args(args);
    match env_threads {
        Some(t) => cmd.env("MWC_LAB_THREADS", t),
        None => cmd.env_remove("MWC_LAB_THREADS"),
    };
    let out = cmd.output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{args:?}");
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
    assert!(err.starts_with("error: "));
    assert!(out.stdout.is_empty());
}

#[test]
fn validation_errors_exit_2_with_one_line() {
    assert_usage_error(&["exrip", "--bogus"], None);
    assert_usage_error(&["frobnicate"], None);
    assert_usage_error(
        &[
            "exrip", "--family", "gold", "--n", "9", "--m", "80", "--k", "600",
        ],
        None,
    );
    assert_usage_error(
        &[
            "exrip", "--family", "gold", "--n", "9", "--m", "80", "--k", "24", "--delta", "1.5",
        ],
        None,
    );
    assert_usage_error(&["measures", "--preset", "table9"], None);
    assert_usage_error(
        &["measures", "--family", "gold", "--n", "4", "--m", "3"],
        None,
    );
    assert_usage_error(&["measures"], None);
    assert_usage_error(
        &["measures", "--preset", "table2_gold", "--family", "gold"],
        None,
    );
    assert_usage_error(
        &["verify", "--preset", "table2_gold", "--trials", "10"],
        None,
    );
    assert_usage_error(
        &["gen", "--family", "gold", "--n", "5", "--m", "3"],
        Some("zero"),
    );
}

#[test]
fn unwritable_output_is_internal_failure() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("x.pat");
    let out = mwc(&[
        "gen",
        "--family",
        "gold",
        "--n",
        "5",
        "--m",
        "3",
        "--out",
        path_str(&target),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = mwc(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("table2"));
}
