use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], workers: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sparse-l1"));
    cmd.args(args);
    if let Some(w) = workers {
        cmd.env("SPARSE_L1_WORKERS", w);
    }
    cmd.output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn params_prints_measurement_count() {
    let out = run(&["params", "--set", "n=4096", "--set", "k=4"], None);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["measurement_count"].as_u64().unwrap() > 0);
    assert_eq!(v["config"]["k"], "4");
    assert_eq!(v["rounds"].as_array().unwrap().len(), 3);
}

#[test]
fn sketch_then_recover_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("x.json");
    let sk = dir.path().join("x.slsk");
    let approx = dir.path().join("approx.json");
    std::fs::write(&sig, r#"{"n": 4096, "entries": [[5, 2.0], [100, -1.5], [4000, 0.5]]}"#).unwrap();
    let out = run(&["sketch", "--signal", path(&sig), "--out", path(&sk), "--set", "k=4"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["recover", "--sketch", path(&sk), "--out", path(&approx)], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&approx).unwrap()).unwrap();
    assert_eq!(v["n"], 4096);
    let entries: Vec<(u64, f64)> = serde_json::from_value(v["entries"].clone()).unwrap();
    assert_eq!(entries, vec![(5, 2.0), (100, -1.5), (4000, 0.5)]);
}

#[test]
fn corrupted_sketch_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let sk = dir.path().join("bad.slsk");
    std::fs::write(&sk, b"SLSK garbage").unwrap();
    let out = run(&["recover", "--sketch", path(&sk), "--out", path(&dir.path().join("o.json"))], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verifier_exit_codes() {
    assert!(run(&["verify-expander", "--seeds", "2"], None).status.success());
    assert!(run(&["verify-isolation", "--n", "4096", "--ell", "8"], None).status.success());
    assert!(run(&["neighborhood", "--nodes", "256"], None).status.success());
    // every start reaching every node is far too strict
    let out = run(&["neighborhood", "--nodes", "256", "--fraction", "1.0", "--starts", "1.0"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(run(&["codes-test", "--rs-trials", "200", "--pv-trials", "2"], None).status.success());
    assert_eq!(run(&["params", "--set", "bogus=1"], None).status.code(), Some(2));
}

#[test]
fn bench_outputs_are_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("small.conf");
    std::fs::write(&conf, "n = 1024\nk = 2\neps = 0.5\ntrials = 3\nseed = 11\ntail_mass = 0.5\n").unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "3"] {
        let csv = dir.path().join(format!("w{w}.csv"));
        let out = run(&["bench", "--config", path(&conf), "--csv", path(&csv)], Some(w));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((std::fs::read(&csv).unwrap(), std::fs::read(csv.with_extension("json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("seed,n,k,eps,measurements,"));
    assert_eq!(run(&["bench", "--config", path(&conf), "--csv", path(&dir.path().join("x.csv"))], Some("zero")).status.code(), Some(2));
}
