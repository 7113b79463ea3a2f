use std::path::Path;
use std::process::{Command, Output};

use bsbm::fitter::FitConfig;
use bsbm::nalgebra::DMatrix;
use bsbm::BsbmParams;

fn bsbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bsbm")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_params(dir: &Path, p_in: f64, p_bt: f64, eta: f64) -> std::path::PathBuf {
    let eta = DMatrix::from_element(2, 2, eta);
    let params = BsbmParams::planted(vec![0.5, 0.5], p_in, p_bt, eta, vec![1, -1]).unwrap();
    let path = dir.join("params.json");
    params.write_file(&path).unwrap();
    path
}

#[test]
fn generate_fit_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), 0.3, 0.1, 0.8);
    let (graph, truth) = (dir.path().join("g.txt"), dir.path().join("z.txt"));
    let out = bsbm(&["generate", "--params", p(&params), "--n", "200", "--seed", "3", "--out-graph", p(&graph), "--out-labels", p(&truth)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let (est, fitted, trace) = (dir.path().join("e.txt"), dir.path().join("fit.json"), dir.path().join("trace.csv"));
    let out = bsbm(&[
        "fit", "--graph", p(&graph), "--k", "2", "--seed", "1", "--out-labels", p(&est), "--out-params", p(&fitted), "--out-trace", p(&trace),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(BsbmParams::read_file(&fitted).unwrap().k(), 2);
    let trace = std::fs::read_to_string(&trace).unwrap();
    assert!(trace.starts_with("outer,lpl,inner_iters\n"));

    let out = bsbm(&["nmi", "--a", p(&est), "--b", p(&truth)]);
    assert_eq!(code(&out), 0);
    let score: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(score > 0.95, "{score}");

    for method in ["mc", "scp", "ppl", "ppl-merge"] {
        let out = bsbm(&["baseline", "--method", method, "--graph", p(&graph), "--k", "2", "--out-labels", p(&est)]);
        assert_eq!(code(&out), 0, "{method}");
        assert_eq!(std::fs::read_to_string(&est).unwrap().lines().count(), 200);
    }

    let out = bsbm(&["select-k", "--graph", p(&graph), "--grid", "1:3", "--folds", "3", "--restarts", "1"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!out.stdout.is_empty());
}

#[test]
fn non_convergence_exits_three_with_output() {
    let dir = tempfile::tempdir().unwrap();
    // pure noise: labels keep moving after a single outer step
    let params = write_params(dir.path(), 0.1, 0.1, 0.0);
    let graph = dir.path().join("g.txt");
    let truth = dir.path().join("z.txt");
    bsbm(&["generate", "--params", p(&params), "--n", "200", "--out-graph", p(&graph), "--out-labels", p(&truth)]);
    let cfg = FitConfig { inner_max: 1, outer_max: 1, restarts: 1, ..FitConfig::default() };
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let est = dir.path().join("e.txt");
    let out = bsbm(&["fit", "--graph", p(&graph), "--k", "2", "--config", p(&cfg_path), "--out-labels", p(&est)]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&est).unwrap().lines().count(), 200);
}

#[test]
fn usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    let out = dir.path().join("out.txt");
    assert_eq!(code(&bsbm(&[])), 1);
    assert_eq!(code(&bsbm(&["fit", "--k", "2"])), 1);
    assert_eq!(code(&bsbm(&["simulate", "--scenario", "zz", "--out", p(&out)])), 1);
    assert_eq!(code(&bsbm(&["--help"])), 0);

    let out_fit = bsbm(&["fit", "--graph", p(&missing), "--k", "2", "--out-labels", p(&out)]);
    assert_eq!(code(&out_fit), 2);
    assert!(String::from_utf8_lossy(&out_fit.stderr).contains("missing.txt"));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "3\n0 1 7\n").unwrap();
    assert_eq!(code(&bsbm(&["fit", "--graph", p(&bad), "--k", "2", "--out-labels", p(&out)])), 2);
}

#[test]
fn diagnose_prints_signal_statistics() {
    let out = bsbm(&["diagnose", "--a", "40", "--b", "40", "--c", "0.6", "--d", "0.6", "--n", "1000"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("28.8"), "{text}");
}

#[test]
fn simulate_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scenario.json");
    let mut cfg = bsbm::eval_harness::builtin_scenario("e").unwrap();
    cfg.sweep = bsbm::eval_harness::Sweep::N(vec![100]);
    cfg.methods = vec![bsbm::eval_harness::Method::Scp];
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let csv = dir.path().join("out.csv");
    let out = bsbm(&["simulate", "--scenario", "e", "--config", p(&cfg_path), "--replications", "2", "--out", p(&csv)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}
