use std::path::Path;
use std::process::{Command, Output};

const REFERENCE: [&str; 10] =
    ["--binary-precision", "0.75", "--kappa", "0.2", "--delta", "0.5", "--pi0", "0.3", "--c", "0.05"];

fn replab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn construct(dir: &Path, kind: &str) -> String {
    let out = dir.join(kind);
    let mut args = vec!["construct", "--kind", kind, "--out", out.to_str().unwrap()];
    args.extend(REFERENCE);
    let o = replab(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out.join("automaton.json").to_str().unwrap().to_string()
}

#[test]
fn check_fei_certificate() {
    let o = replab(&["check-fei", "--binary-precision", "0.75", "--kappa", "0.2", "--delta", "0.4"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["holds"], true);
    assert!((v["v_bar"].as_f64().unwrap() - 0.48 / 0.7).abs() < 1e-12);
    assert!((v["binary_threshold"].as_f64().unwrap() - 4.0 / 11.0).abs() < 1e-12);

    let o = replab(&["check-fei", "--binary-precision", "0.75", "--kappa", "0.2", "--delta", "0.3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["holds"], false);
    assert_eq!(v["refutation"]["horizon"]["horizon_t"], 8);
}

#[test]
fn check_fei_sweep_csv() {
    let o = replab(&["check-fei", "--binary-precision", "0.75", "--kappa", "0.2", "--sweep", "delta=0.3:0.4:0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,holds,slack,v_bar");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.3,false,-"));
    assert!(lines[3].starts_with("0.4,true,"));
}

#[test]
fn phase_sweep_flips_at_threshold() {
    let o = replab(&["phase-sweep", "--binary-precision", "0.75", "--kappa", "0.2", "--delta", "0.30:0.45:0.01"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rows = text.lines();
    let header: Vec<&str> = rows.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<String>> = rows.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 16);
    let first_hold = rows.iter().position(|r| r[col("fei_holds")] == "true").unwrap();
    assert_eq!(rows[first_hold][col("delta")], "0.37");
    assert_eq!(rows[first_hold][col("frontier")], "fails->holds");
    assert!(rows[..first_hold].iter().all(|r| r[col("fei_holds")] == "false"));
    assert!(rows[first_hold..].iter().all(|r| r[col("fei_holds")] == "true"
        && r[col("fe_construction_verified")] == "true"
        && r[col("non_efe_construction_verified")] == "true"));
    let thr: f64 = rows[0][col("delta_threshold")].parse().unwrap();
    assert!((thr - 4.0 / 11.0).abs() < 1e-12);
    assert!(rows[..first_hold].iter().all(|r| r[col("outside_option_bound")].parse::<f64>().unwrap() < 1.0));
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["fe", "non-efe"] {
        let path = construct(dir.path(), kind);
        let o = replab(&["verify", "--automaton", &path]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(report["passed"], true);
    }

    // a perturbed belief
    let good = construct(dir.path(), "non-efe");
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&good).unwrap()).unwrap();
    let b = doc["states"][1]["belief"].as_f64().unwrap();
    doc["states"][1]["belief"] = serde_json::json!(b + 0.02);
    let bad = dir.path().join("perturbed.json");
    std::fs::write(&bad, doc.to_string()).unwrap();
    assert_eq!(replab(&["verify", "--automaton", bad.to_str().unwrap()]).status.code(), Some(3));

    // a truncated file
    let text = std::fs::read_to_string(&good).unwrap();
    let cut = dir.path().join("cut.json");
    std::fs::write(&cut, &text[..text.len() / 2]).unwrap();
    assert_eq!(replab(&["verify", "--automaton", cut.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn validation_errors_exit_two() {
    let o = replab(&["check-fei", "--binary-precision", "0.75", "--kappa", "1.5", "--delta", "0.4"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"], "invalid_model");

    let o = replab(&["check-fei", "--kappa", "0.2", "--delta", "0.4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = replab(&["bound-outside-option", "--binary-precision", "0.75", "--kappa", "0.2", "--delta", "0.4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = replab(&["construct", "--kind", "fe", "--binary-precision", "0.75", "--kappa", "0.2", "--delta", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("model.toml");
    std::fs::write(
        &cfg,
        "kappa = 0.2\ndelta = 0.3\npi0 = 0.3\nc = 0.0\nsignals = [{ name = \"Fail\", f0 = 0.75, f1 = 0.25 }, { name = \"Pass\", f0 = 0.25, f1 = 0.75 }]\n",
    )
    .unwrap();
    let o = replab(&["check-fei", "--config", cfg.to_str().unwrap()]);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()["holds"], false);
    let o = replab(&["check-fei", "--config", cfg.to_str().unwrap(), "--delta", "0.4"]);
    assert_eq!(serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()["holds"], true);
}

#[test]
fn bound_sweep_csv() {
    let o = replab(&[
        "bound-sweep", "--binary-precision", "0.75", "--kappa", "0.2", "--delta", "0.3",
        "--pi0-grid", "3e-1,3e-2,3e-3", "--c-grid", "0,0.01",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("pi0,c,T,eta_star,bound\n0.3,0.0,8,"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn simulate_is_deterministic_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = construct(dir.path(), "non-efe");
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_replab"))
            .args(["simulate", "--automaton", &path, "--paths", "3000", "--horizon", "120", "--seed", "11"])
            .args(["--per-period", "--out", out.to_str().unwrap()])
            .env("REPLAB_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("a", "4");
    let b = run("b", "1");
    for f in ["summary.json", "per_period.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let ma: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    let mb: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(b.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(ma["config_sha256"], mb["config_sha256"]);
    assert_eq!(ma["seed"], 11);
    assert_eq!(ma["outputs"], serde_json::json!(["summary.json", "per_period.csv"]));
    let csv = std::fs::read_to_string(a.join("per_period.csv")).unwrap();
    assert!(csv.starts_with("t,mean_effort,replace_rate,mean_belief,favorable_replacements\n"));
    assert_eq!(csv.lines().count(), 121);
}

#[test]
fn per_period_needs_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = construct(dir.path(), "fe");
    let o = replab(&["simulate", "--automaton", &path, "--paths", "10", "--horizon", "5", "--per-period"]);
    assert_eq!(o.status.code(), Some(2));
}
