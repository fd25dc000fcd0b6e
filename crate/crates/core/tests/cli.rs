use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use monmf::experiments::gen_mixed_sign_instance;
use monmf::io::write_matrix;
use serde_json::Value;

fn monmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monmf"))
        .args(args)
        .env_remove("MONMF_LOG")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn synth(dir: &Path, scenario: &str, seed: &str) {
    let out = monmf(&[
        "synth",
        "--scenario",
        scenario,
        "--seed",
        seed,
        "--out",
        p(dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn synth_writes_five_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s1");
    synth(&dir, "s1", "42");
    let mut names: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "H_true.csv",
            "W_true.csv",
            "Z_clean.csv",
            "Z_noisy.csv",
            "meta.json"
        ]
    );
    let meta = json(&dir.join("meta.json"));
    assert_eq!(meta["scenario"], "s1");
    assert_eq!(meta["seed"], 42);
    assert_eq!(meta["noise_level"], 0.05);
    assert_eq!(meta["signals"].as_array().unwrap().len(), 3);
}

#[test]
fn synth_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    synth(&a, "s2", "42");
    synth(&b, "s2", "42");
    for f in [
        "H_true.csv",
        "W_true.csv",
        "Z_clean.csv",
        "Z_noisy.csv",
        "meta.json",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn synth_rejects_unknown_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let out = monmf(&["synth", "--scenario", "s7", "--out", p(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn fit_mnmf_on_scenario_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("s1");
    synth(&data, "s1", "3");
    let out_dir = tmp.path().join("fit");
    let out = monmf(&[
        "fit",
        "--method",
        "mnmf",
        "--input",
        p(&data.join("Z_clean.csv")),
        "--rank",
        "3",
        "--pattern",
        "inc,inc,inc",
        "--out",
        p(&out_dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["W.csv", "H.csv", "trace.csv", "report.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let report = json(&out_dir.join("report.json"));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["method"], "mnmf");
    assert_eq!(report["scenario"], "s1");
    assert_eq!(report["monotonicity_feasible"], true);
    assert_eq!(report["h_effective_rank"], 3);
    assert!(report["wall_time_s"].is_null());
    assert!(report.get("per_source_signal_error").is_none());
    assert_eq!(report["config"]["pattern"], "inc,inc,inc");
    assert_eq!(report["config"]["max_outer_iter"], 500);

    let trace = fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,objective,w_change,h_change"));
    let rows = lines.count();
    assert_eq!(rows as u64, report["outer_iterations"].as_u64().unwrap());

    let h = monmf::io::read_matrix(out_dir.join("H.csv")).unwrap();
    assert_eq!(h.shape(), (3, 50));
}

#[test]
fn fit_requires_pattern_for_monotone_methods() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("s1");
    synth(&data, "s1", "0");
    for method in ["mnmf", "msemi"] {
        let out = monmf(&[
            "fit",
            "--method",
            method,
            "--input",
            p(&data.join("Z_noisy.csv")),
            "--rank",
            "3",
            "--out",
            p(&tmp.path().join("x")),
        ]);
        assert_eq!(out.status.code(), Some(2), "{method}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("--pattern"));
    }
}

#[test]
fn multiplicative_rejects_negative_data() {
    let tmp = tempfile::tempdir().unwrap();
    let z = tmp.path().join("neg.csv");
    fs::write(&z, "1,2,3\n0.5,-0.1,2\n").unwrap();
    let out = monmf(&[
        "fit",
        "--method",
        "nnmf-mult",
        "--input",
        p(&z),
        "--rank",
        "1",
        "--out",
        p(&tmp.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonnegative input required"));
}

#[test]
fn malformed_input_is_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let z = tmp.path().join("bad.csv");
    fs::write(&z, "1,2,3\n4,5\n").unwrap();
    let out = monmf(&[
        "fit",
        "--method",
        "nmf-als",
        "--input",
        p(&z),
        "--rank",
        "1",
        "--out",
        p(&tmp.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let missing = monmf(&[
        "fit",
        "--method",
        "nmf-als",
        "--input",
        p(&tmp.path().join("none.csv")),
        "--rank",
        "1",
        "--out",
        p(&tmp.path().join("x")),
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn semi_handles_mixed_sign_data_where_mnmf_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let d = gen_mixed_sign_instance(4, 8, 40).unwrap();
    assert!(!d.z_noisy.is_nonnegative());
    let z = tmp.path().join("mixed.csv");
    write_matrix(&z, &d.z_noisy).unwrap();

    let run = |method: &str| {
        let out_dir = tmp.path().join(method);
        let out = monmf(&[
            "fit",
            "--method",
            method,
            "--input",
            p(&z),
            "--rank",
            "2",
            "--pattern",
            "inc,dec",
            "--out",
            p(&out_dir),
        ]);
        assert!(
            out.status.success(),
            "{method}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        json(&out_dir.join("report.json"))
    };
    let semi = run("msemi");
    let nmf = run("mnmf");
    assert!(semi["warnings"].as_array().unwrap().is_empty());
    assert!(nmf["warnings"]
        .as_array()
        .unwrap()
        .iter()
        .any(|w| w.as_str().unwrap().contains("negative")));
    let e_semi = semi["reconstruction_error"].as_f64().unwrap();
    let e_nmf = nmf["reconstruction_error"].as_f64().unwrap();
    assert!(e_semi < 1e-4, "{e_semi}");
    assert!(e_semi < e_nmf);
}

#[test]
fn strict_mode_flags_iteration_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("s2");
    synth(&data, "s2", "1");
    let out = monmf(&[
        "fit",
        "--method",
        "mnmf",
        "--input",
        p(&data.join("Z_noisy.csv")),
        "--rank",
        "3",
        "--pattern",
        "inc,inc,dec",
        "--max-iter",
        "2",
        "--strict",
        "--out",
        p(&tmp.path().join("f")),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let report = json(&tmp.path().join("f").join("report.json"));
    assert_eq!(report["termination"], "max-iterations");
}

#[test]
fn compare_three_methods_mnmf_error_smallest() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("cmp");
    let out = monmf(&[
        "compare",
        "--scenario",
        "s1",
        "--seed",
        "7",
        "--methods",
        "mnmf,nnmf-mult,nmf-als",
        "--out",
        p(&out_dir),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cmp = json(&out_dir.join("comparison.json"));
    let reports = cmp["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    assert_eq!(cmp["partial"], false);
    let err = |i: usize| reports[i]["reconstruction_error"].as_f64().unwrap();
    assert_eq!(reports[0]["method"], "mnmf");
    assert!(
        err(0) < err(1) && err(0) < err(2),
        "{} {} {}",
        err(0),
        err(1),
        err(2)
    );
    for r in reports {
        assert_eq!(r["per_source_signal_error"].as_array().unwrap().len(), 3);
    }

    let signals = fs::read_to_string(out_dir.join("signals.csv")).unwrap();
    let mut lines = signals.lines();
    assert_eq!(
        lines.next(),
        Some("method,source,sample,true_value,estimated_value")
    );
    assert_eq!(lines.count(), 3 * 3 * 50);
}

#[test]
fn compare_single_method() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("cmp");
    let out = monmf(&[
        "compare",
        "--scenario",
        "s2",
        "--seed",
        "2",
        "--methods",
        "mnmf",
        "--out",
        p(&out_dir),
    ]);
    assert!(out.status.success());
    let cmp = json(&out_dir.join("comparison.json"));
    let reports = cmp["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["monotonicity_feasible"], true);
    assert_eq!(cmp["scenario"]["pattern"], "inc,inc,dec");
}

#[test]
fn compare_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let out = monmf(&[
            "compare",
            "--scenario",
            "s2",
            "--seed",
            "11",
            "--methods",
            "mnmf,msemi,nnmf-mult,nmf-als",
            "--out",
            p(&dir),
        ]);
        assert!(out.status.success());
        dir
    };
    let a = run("a");
    let b = run("b");
    for f in ["comparison.json", "signals.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn compare_records_timing_only_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("t");
    let out = monmf(&[
        "compare",
        "--scenario",
        "s1",
        "--methods",
        "nnmf-mult",
        "--timing",
        "--out",
        p(&dir),
    ]);
    assert!(out.status.success());
    let cmp = json(&dir.join("comparison.json"));
    assert!(cmp["reports"][0]["wall_time_s"].as_f64().unwrap() >= 0.0);
}
