use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cilab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cilab"))
        .args(args)
        .env("CILAB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn verify_geometry_passes_and_prints_r0() {
    let o = cilab(&["verify-geometry", "--grid", "32", "--samples", "20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("r0 even = 0.0971703"));
    let o = cilab(&["verify-geometry", "--grid", "32", "--samples", "20", "--json"]);
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["r0"].as_array().unwrap().len(), 2);
}

#[test]
fn corrupted_family_names_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("families.json");
    let o = cilab(&["verify-geometry", "--grid", "16", "--samples", "4", "--export", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let mut fams: serde_json::Value = serde_json::from_str(&fs::read_to_string(&good).unwrap()).unwrap();
    fams[0]["members"][1]["k"] = serde_json::json!([2, 1, 0]);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, fams.to_string()).unwrap();
    let o = cilab(&["verify-geometry", "--family", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("symmetry"));
    let o = cilab(&["verify-geometry", "--grid", "16", "--samples", "4", "--family", good.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&cilab(&["params", "--eps0", "0.5", "--lambda0", "4"])), 64);
    assert_eq!(code(&cilab(&["no-such-command"])), 64);
    assert_eq!(code(&cilab(&["run", "--grid", "100"])), 64);
    assert_eq!(code(&cilab(&["params"])), 64);
    let o = Command::new(env!("CARGO_BIN_EXE_cilab"))
        .args(["params", "--lambda0", "4"])
        .env("CILAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 64);
    assert_eq!(code(&cilab(&["--help"])), 0);
}

#[test]
fn params_prints_d_min_and_search_is_reproducible() {
    let o = cilab(&["params", "--lambda0", "1e12", "--stages", "3"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("d_min = 0.99983"));
    let a = cilab(&["params", "--search", "--stages", "8", "--json"]);
    let b = cilab(&["params", "--search", "--stages", "8", "--json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["ledger_pass"], true);
    assert!(v["ledger"]["rows"].as_array().unwrap().iter().all(|r| r["slack"].is_number()));
}

#[test]
fn params_files_and_no_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = cilab(&["params", "--search", "--stages", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("params.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("q,lambda,ln_lambda,ln_delta,ln_mu,ln_ell,slack_"));
    assert_eq!(csv.lines().count(), 6);
    assert!(out.join("params.json").exists());
    assert_eq!(code(&cilab(&["params", "--search", "--search-max-log2", "20"])), 5);
    // the desk seed fails its ledger
    assert_eq!(code(&cilab(&["params", "--lambda0", "4", "--stages", "2"])), 5);
}

#[test]
fn capacity_is_exit_4() {
    let o = cilab(&["run", "--grid", "16", "--out", "/nonexistent/never"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));
}

fn run_initial(out: &Path) -> Output {
    cilab(&[
        "run", "--stages", "0", "--grid", "32", "--samples", "9", "--out", out.to_str().unwrap(),
    ])
}

#[test]
fn initial_run_is_exact_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run_initial(&a)), 0);
    assert_eq!(code(&run_initial(&b)), 0);
    for f in ["manifest.json", "timeseries.csv", "ledger.csv", "norms.csv", "lemma.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let series = fs::read_to_string(a.join("timeseries.csv")).unwrap();
    let rows: Vec<&str> = series.lines().skip(1).collect();
    assert_eq!(rows.len(), 9);
    for r in rows {
        let residual: f64 = r.split(',').nth(2).unwrap().parse().unwrap();
        assert!(residual <= 1e-8, "{r}");
    }
    let o = cilab(&["report", "--in", a.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)[0]["samples"], 9);
}

#[test]
fn verify_operators_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = cilab(&[
        "verify-operators", "--grid", "16", "--fields", "3", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let s = fs::read_to_string(dir.path().join("schauder.csv")).unwrap();
    assert!(s.starts_with("lambda,norm_alpha,ratio\n4,"));
    assert!(dir.path().join("commutator.csv").exists());
}
