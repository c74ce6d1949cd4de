use std::path::Path;
use std::process::{Command, Output};

fn foldsolve(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_foldsolve"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

#[test]
fn scalar_solve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("scalar.json");
    let out = foldsolve(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("solve.json")).unwrap()).unwrap();
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 3);
    for r in results {
        let (u, v, w) = (r["u"][0].as_f64().unwrap(), r["v"][0].as_f64().unwrap(), r["w"][0].as_f64().unwrap());
        assert!((u - 1.0).abs() < 1e-8 && (v - 1.0).abs() < 1e-8 && (w - 2.0).abs() < 1e-8, "{r}");
        assert!((r["objective_t"].as_f64().unwrap() - 2.0).abs() < 1e-8);
        let trace = dir.path().join(format!("solve_{}_trace.csv", r["solver"].as_str().unwrap()));
        assert!(trace.exists());
    }
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ \"schema_version\": 1, \"alpha\": ").unwrap();
    let out_dir = dir.path().join("out");
    let out = foldsolve(&["solve", "--config", cfg.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("scalar.json")).unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, text.replace("\"mu\"", "\"step\"")).unwrap();
    let out = foldsolve(&["solve", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn wrong_schema_version() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("scalar.json")).unwrap();
    let cfg = dir.path().join("v2.json");
    std::fs::write(&cfg, text.replace("\"schema_version\": 1", "\"schema_version\": 2")).unwrap();
    let out = foldsolve(&["solve", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_lists_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let out = foldsolve(&["solve", "--help"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["schema_version", "alpha", "beta", "inner_mu", "stop_tol", "trace_times"] {
        assert!(text.contains(key), "missing {key}");
    }
    let out = foldsolve(&["experiment", "--help"], dir.path());
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["betas", "square_control", "target_support", "repetitions"] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn shipped_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, file, expect) in [("prox-table", "prox_table.json", "prox_table.csv"), ("rip", "rip.json", "rip.json")] {
        let cfg = configs().join(file);
        let out = foldsolve(&[cmd, "--config", cfg.to_str().unwrap()], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(expect).exists());
    }
}

#[test]
fn analyze_reads_solve_trace() {
    let dir = tempfile::tempdir().unwrap();
    let problem = serde_json::json!({ "generated": { "spec": { "ensemble": { "kind": "gaussian", "m": 30, "n": 80 }, "s": 4 }, "seed": 3 } });
    let solve_cfg = serde_json::json!({
        "schema_version": 1, "problem": problem, "solvers": ["augmented"],
        "alpha": 0.01, "beta": 1.0, "q": 0.5, "mu": 0.1
    });
    std::fs::write(dir.path().join("solve.json.in"), solve_cfg.to_string()).unwrap();
    let out = foldsolve(&["solve", "--config", dir.path().join("solve.json.in").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let analyze_cfg = serde_json::json!({
        "schema_version": 1, "trace": "solve_augmented_trace.csv", "problem": problem,
        "solver": "augmented", "alpha": 0.01, "beta": 1.0, "q": 0.5, "mu": 0.1
    });
    std::fs::write(dir.path().join("analyze.json.in"), analyze_cfg.to_string()).unwrap();
    let out = foldsolve(&["analyze", "--config", dir.path().join("analyze.json.in").to_str().unwrap()], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("analyze.json")).unwrap()).unwrap();
    let rate = doc["empirical_rate"].as_f64().unwrap();
    assert!(rate > 0.0 && rate < 1.0, "{doc}");
    let theory = doc["theoretical_rate"].as_f64().unwrap();
    assert!(rate <= theory + 0.02, "{doc}");
}
