use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.fcidump"))
}

fn sqdopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqdopt")).args(args).env_remove("SQDOPT_OUTPUT_DIR").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn quick_optimize(out: &Path, method: &str) -> Output {
    let f = fixture("h6_0.9");
    sqdopt(&[
        "optimize",
        "--fcidump",
        f.to_str().unwrap(),
        "--freeze",
        "0,1",
        "--method",
        method,
        "--seed",
        "3",
        "--max-iter",
        "15",
        "--shots",
        "500",
        "--output-dir",
        out.to_str().unwrap(),
    ])
}

#[test]
fn parse_reports_the_water_hamiltonian() {
    let f = fixture("h2o");
    let o = sqdopt(&["parse", "--fcidump", f.to_str().unwrap(), "--freeze", "0,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("qubits: 10"), "{text}");
    assert!(text.contains("electrons: 3 alpha, 3 beta"), "{text}");
    assert!(text.contains("pauli_terms: 252"), "{text}");

    let o = sqdopt(&["parse", "--fcidump", f.to_str().unwrap(), "--freeze", "0,1", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["qubits"], 10);
}

#[test]
fn plan_lists_hydrogen_chain_groups() {
    let f = fixture("h6_0.9");
    let o = sqdopt(&["plan", "--fcidump", f.to_str().unwrap(), "--freeze", "0,1", "--k", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let n: usize = stderr(&o).trim().strip_suffix(" groups").unwrap().parse().unwrap();
    assert!(n.abs_diff(68) <= 5, "{n}");
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("basis,n_terms,weight,cumulative_fraction,selected"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows[n - 1].contains(",1.000000,"));
    assert_eq!(rows.iter().filter(|r| r.ends_with(",true")).count(), 5);
    // The all-Z basis is always selected, as a group or as an extra row.
    assert!(rows.iter().any(|r| r.starts_with("ZZZZZZZZ,") && r.ends_with(",true")));
    assert!(rows.len() == n || rows.len() == n + 1);
}

#[test]
fn missing_fixture_exits_3_and_names_it() {
    let o = sqdopt(&["parse", "--fcidump", "no/such/file.fcidump"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no/such/file.fcidump"));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(sqdopt(&["parse", "--nonsense"]).status.code(), Some(2));
    assert_eq!(sqdopt(&["optimize", "--method", "dmrg"]).status.code(), Some(2));
    assert_eq!(sqdopt(&["benchmark", "--fcidump", "x", "--steps", "3"]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "fcidump = \"h6.fcidump\"\nmethods = [\"vqe\"]\nshots_per_basis = 10\n").unwrap();
    let o = sqdopt(&["optimize", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("shots_per_basis"), "{}", stderr(&o));

    let f = fixture("h6_0.9");
    let o = sqdopt(&["optimize", "--fcidump", f.to_str().unwrap(), "--method", "sqdopt", "--k", "0"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn optimize_writes_artifacts_that_evaluate_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let o = quick_optimize(dir.path(), "vqe,sqdopt");
    assert!(o.status.success(), "{}", stderr(&o));
    for method in ["vqe", "sqdopt"] {
        let run = dir.path().join(format!("h6_0.9-{method}-seed3"));
        for file in ["result.json", "trace.csv", "trace.json", "config.toml"] {
            assert!(run.join(file).is_file(), "{method} {file}");
        }
        let r = json(&run.join("result.json"));
        assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
        assert_eq!(r["fixture"], "h6_0.9");
        assert_eq!(r["result"]["spec"]["ansatz"]["init_seed"], 3);
        let trace = std::fs::read_to_string(run.join("trace.csv")).unwrap();
        let hash = r["config_hash"].as_str().unwrap();
        assert_eq!(trace.lines().count(), 16);
        assert!(trace.lines().skip(1).all(|l| l.starts_with(hash)));
        assert!(!dir.path().join(".sqdopt.lock").exists());
    }

    let result = dir.path().join("h6_0.9-sqdopt-seed3/result.json");
    let e_final = json(&result)["result"]["e_final"].as_f64().unwrap();
    let o = sqdopt(&["evaluate", "--params", result.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let energy: f64 = text.lines().find_map(|l| l.strip_prefix("energy: ")).unwrap().parse().unwrap();
    assert!((energy - e_final).abs() < 1e-9, "{energy} vs {e_final}");
    assert!(text.contains("percent_error: "));

    let params = json(&result)["result"]["parameters"].to_string();
    let f = fixture("h6_0.9");
    let o = sqdopt(&["evaluate", "--params", &params, "--fcidump", f.to_str().unwrap(), "--freeze", "0,1"]);
    assert!(stdout(&o).contains(&format!("energy: {energy:.10}")), "{}", stdout(&o));
}

#[test]
fn identical_configs_reproduce_results() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(quick_optimize(a.path(), "sqdopt").status.success());
    assert!(quick_optimize(b.path(), "sqdopt").status.success());
    let load = |d: &Path| json(&d.join("h6_0.9-sqdopt-seed3/result.json"));
    let (ra, rb) = (load(a.path()), load(b.path()));
    assert_eq!(ra["config_hash"], rb["config_hash"]);
    assert_eq!(ra["result"]["e_final"], rb["result"]["e_final"]);
    assert_eq!(ra["result"]["parameters"], rb["result"]["parameters"]);
    let costs = |r: &serde_json::Value| r["result"]["trace"]["records"].as_array().unwrap().iter().map(|x| x["cost"].clone()).collect::<Vec<_>>();
    assert_eq!(costs(&ra), costs(&rb));
}

#[test]
fn held_lock_exits_8() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(".sqdopt.lock"), "1").unwrap();
    let o = quick_optimize(dir.path(), "hf");
    assert_eq!(o.status.code(), Some(8));
    assert!(stderr(&o).contains(".sqdopt.lock"));
}

#[test]
fn output_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture("h2_0.7414");
    let o = Command::new(env!("CARGO_BIN_EXE_sqdopt"))
        .args(["optimize", "--fcidump", f.to_str().unwrap(), "--method", "hf"])
        .env("SQDOPT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("h2_0.7414-hf-seed0/result.json").is_file());
}

#[test]
fn compare_tabulates_and_refuses_mixed_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    assert!(quick_optimize(dir.path(), "hf,vqe").status.success());
    let hf = dir.path().join("h6_0.9-hf-seed3/result.json");
    let vqe = dir.path().join("h6_0.9-vqe-seed3/result.json");
    let o = sqdopt(&["compare", hf.to_str().unwrap(), vqe.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("fixture,method,n_runs,"));
    assert!(text.contains("h6_0.9,hf,1,") && text.contains("h6_0.9,vqe,1,"));

    let mut v = json(&vqe);
    v["fixture_hash"] = serde_json::Value::String("0".repeat(64));
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, v.to_string()).unwrap();
    let o = sqdopt(&["compare", hf.to_str().unwrap(), tampered.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("tampered.json"));
}

#[test]
fn sweep_reports_statistics_and_failures() {
    let f = fixture("h6_0.9");
    let o = sqdopt(&[
        "sweep",
        "--fcidump",
        f.to_str().unwrap(),
        "missing_1.0.fcidump",
        "--freeze",
        "0,1",
        "--methods",
        "hf,vqe,sqdopt",
        "--seeds",
        "0,1",
        "--max-iter",
        "10",
        "--shots",
        "300",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][..5], ["label", "bond_length", "method", "n_seeds", "n_failed"]);
    assert_eq!(rows.len(), 7);
    let sqdopt_row = rows.iter().find(|r| r[0] == "h6_0.9" && r[2] == "sqdopt").unwrap();
    assert_eq!(sqdopt_row[1], "0.9");
    assert!(!sqdopt_row[8].is_empty());
    let missing = rows.iter().find(|r| r[0] == "missing_1.0").unwrap();
    assert_eq!(missing[4], "2");
    assert!(missing[9].contains("missing_1.0.fcidump"));
}

#[test]
fn benchmark_reports_per_phase_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.csv");
    let f = fixture("h6_0.9");
    let o = sqdopt(&[
        "benchmark",
        "--fcidump",
        f.to_str().unwrap(),
        "--freeze",
        "0,1",
        "--methods",
        "sqdopt,fci",
        "--steps",
        "10",
        "--shots",
        "300",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(&out).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    for col in ["median_step_seconds", "bases_per_step", "state_prep_seconds", "sampling_seconds", "davidson_seconds", "status", "timing"] {
        assert!(header.iter().any(|h| h == col), "{col}");
    }
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(&rows[0][col("method")], "sqdopt");
    assert_eq!(&rows[0][col("steps")], "10");
    assert_eq!(&rows[0][col("bases_per_step")], "5");
    assert!(rows[0][col("median_step_seconds")].parse::<f64>().unwrap() > 0.0);
    assert_eq!(&rows[1][col("timing")], "total");
}
