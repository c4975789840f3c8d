use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use saddleprec::problem::{self, GenerateOptions};
use saddleprec::{dense, mtx, Regime};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_saddleprec"));
    cmd.args(args).env_remove("SADDLEPREC_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn sha(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

fn cluster_counts(report: &Value) -> Vec<(f64, u64)> {
    report["clusters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["center"][0].as_f64().unwrap(), c["count"].as_u64().unwrap()))
        .collect()
}

fn manifest_ok(dir: &Path) -> bool {
    let m = json(&dir.join("run_manifest.json"));
    m["files"]
        .as_array()
        .unwrap()
        .iter()
        .all(|f| sha(&dir.join(f["path"].as_str().unwrap())) == f["sha256"].as_str().unwrap())
}

#[test]
fn generate_writes_four_files_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = run(&[
            "generate", "--n", "40", "--m1", "6", "--m2", "4", "--regime", "min-indep", "--seed", "7", "-o",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["A.mtx", "B1.mtx", "B2.mtx", "manifest.json"]);
    for n in &names {
        assert_eq!(sha(&a.join(n)), sha(&b.join(n)), "{n}");
    }
    let p = problem::load(&a).unwrap();
    assert_eq!(p.sizes(), [40, 6, 4]);
    assert_eq!(p.regime, Regime::MinimallyIndependent);
}

#[test]
fn inconsistent_dims_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(code(&run(&["generate", "--regime", "max-rd", "--m1", "3", "-o", out])), 2);
    assert_eq!(code(&run(&["generate", "--n", "5", "--m1", "4", "--m2", "4", "-o", out])), 2);
    assert_eq!(code(&run(&["spectrum", "--precond", "p9", "-o", out])), 2);
    assert_eq!(code(&run(&["spectrum", "--weight", "diag:1,2", "-o", out])), 2);
    assert_eq!(code(&run(&["spectrum", "--problem", "/nonexistent", "-o", out])), 2);
    assert_eq!(code(&run_env(&["spectrum", "-o", out], &[("SADDLEPREC_THREADS", "0")])), 2);
}

#[test]
fn spectrum_p2d_on_max_rd() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path();
    let o = run(&[
        "spectrum", "--n", "40", "--m1", "0", "--m2", "12", "--regime", "max-rd", "--seed", "3", "--precond", "p2d",
        "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rep = json(&out.join("spectrum_p2d.json"));
    assert_eq!(rep["verdict"], "pass");
    let c = cluster_counts(&rep);
    assert_eq!(c.len(), 2);
    assert!((c[0].0 + 1.0).abs() < 1e-6 && c[0].1 == 12);
    assert!((c[1].0 - 1.0).abs() < 1e-6 && c[1].1 == 40);
    assert_eq!(rep["eigs"].as_array().unwrap().len(), 52);
    assert!(manifest_ok(out));
}

#[test]
fn spectrum_p3t_without_b1_is_one_cluster() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "spectrum", "--n", "20", "--m1", "0", "--m2", "5", "--regime", "max-rd", "--precond", "p3t", "-o",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let c = cluster_counts(&json(&tmp.path().join("spectrum_p3t.json")));
    assert_eq!(c.len(), 1);
    assert!((c[0].0 - 1.0).abs() < 1e-9);
    assert_eq!(c[0].1, 25);
}

#[test]
fn spectrum_p2d_off_regime_is_not_ideal() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "spectrum", "--n", "30", "--m1", "4", "--m2", "3", "--regime", "min-indep", "--precond", "p2d,p3d", "-o",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(json(&tmp.path().join("spectrum_p2d.json"))["verdict"], "not-ideal");
    assert_eq!(json(&tmp.path().join("spectrum_p3d.json"))["verdict"], "pass");
    let m = json(&tmp.path().join("run_manifest.json"));
    assert_eq!(m["tasks"][0]["status"], "not-ideal");
}

#[test]
fn spectrum_failure_exits_four() {
    // a cluster tolerance below rounding level splits every cluster
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "spectrum", "--n", "20", "--m1", "0", "--m2", "4", "--regime", "max-rd", "--precond", "p2d",
        "--cluster-tol", "1e-300", "-o", tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&tmp.path().join("spectrum_p2d.json"))["verdict"], "fail");
}

fn summary_rows(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("summary.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn solve_min_indep_and_general() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let o = run(&[
        "solve", "--n", "40", "--m1", "6", "--m2", "4", "--regime", "min-indep", "--seed", "1", "--precond",
        "p3d,identity", "-o", a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = summary_rows(&a);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "p3d");
    assert_eq!(rows[0][2], "minres");
    assert!(rows[0][3].parse::<usize>().unwrap() <= 5);
    assert_eq!(rows[1][1], "identity");
    assert_eq!(rows[1][4], "true");
    let csv = fs::read_to_string(a.join("solve_p3d.csv")).unwrap();
    assert!(csv.starts_with("iter,precond_resid,true_resid\n"));
    assert!(manifest_ok(&a));

    let b = tmp.path().join("b");
    let o = run(&[
        "solve", "--n", "40", "--m1", "6", "--m2", "4", "--regime", "general", "--seed", "1", "--precond", "p3t",
        "-o", b.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rows = summary_rows(&b);
    assert_eq!(rows[0][2], "gmres");
    assert!(rows[0][3].parse::<usize>().unwrap() <= 5);
    assert!(rows[0][5].parse::<f64>().unwrap() <= 1e-10);
}

#[test]
fn solve_non_convergence_exits_five() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["solve", "--precond", "identity", "--maxit", "3", "-o", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 5);
    assert_eq!(summary_rows(tmp.path())[0][4], "false");
}

#[test]
fn solve_minres_with_triangular_preconditioner_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "solve", "--regime", "general", "--precond", "p3t", "--solver", "minres", "-o",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_inverse_regimes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let o = run(&[
        "verify-inverse", "--n", "30", "--m1", "4", "--m2", "3", "--regime", "min-indep", "-o",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rep = json(&a.join("verify_inverse.json"));
    assert_eq!(rep["passed"], true);
    let names: Vec<&str> = rep["rows"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    for want in ["null-b2/left", "aug-shift", "null-a/vs-direct", "null-a-mult/left", "null-a/vs-null-b2"] {
        assert!(names.contains(&want), "{want}");
    }

    let b = tmp.path().join("b");
    let o = run(&[
        "verify-inverse", "--n", "30", "--m1", "4", "--m2", "3", "--regime", "general", "--weight", "diag:1,2,3",
        "-o", b.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rep = json(&b.join("verify_inverse.json"));
    assert!(rep["rows"].as_array().unwrap().iter().all(|r| !r["name"].as_str().unwrap().starts_with("null-a")));
    assert_eq!(rep["skipped"].as_array().unwrap().len(), 2);
    let full = rep["rows"].as_array().unwrap().iter().find(|r| r["name"] == "null-b2-full/left").unwrap();
    assert!(full["value"].as_f64().unwrap() <= 1e-8);

    let c = tmp.path().join("c");
    let o = run(&["verify-inverse", "--n", "10", "--m1", "3", "--m2", "0", "--regime", "general", "-o", c.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rep = json(&c.join("verify_inverse.json"));
    let shift = rep["rows"].as_array().unwrap().iter().find(|r| r["name"] == "aug-shift").unwrap();
    assert_eq!(shift["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn sweep_scaling_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep-scaling", "--n", "30", "--m1", "4", "--m2", "3", "--regime", "min-indep", "--seed", "2",
        "--scalings", "0.25,0.5,1,2", "-o", tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let rep = json(&tmp.path().join("sweep_scaling.json"));
    let counts: Vec<u64> = rep["points"].as_array().unwrap().iter().map(|p| p["clusters"].as_u64().unwrap()).collect();
    assert_eq!(counts, [4, 3, 4, 4]);
}

#[test]
fn split_recovers_a_shuffled_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let p = problem::generate(25, 3, 4, Regime::MinimallyIndependent, 5, &GenerateOptions::default()).unwrap();
    let b = dense::vstack(&[&p.b2, &p.b1]);
    mtx::write_array_file(tmp.path().join("A.mtx"), &p.a).unwrap();
    mtx::write_array_file(tmp.path().join("B.mtx"), &b).unwrap();
    let out = tmp.path().join("split");
    let o = run(&[
        "split", "--a", tmp.path().join("A.mtx").to_str().unwrap(), "--b", tmp.path().join("B.mtx").to_str().unwrap(),
        "-o", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let info = json(&out.join("split.json"));
    assert_eq!(info["m1"], 3);
    assert_eq!(info["m2"], 4);
    assert_eq!(info["regime"], "min-indep");
    assert!(manifest_ok(&out));

    let o = run(&["spectrum", "--problem", out.to_str().unwrap(), "--precond", "p3d,p3t", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["1", "1", "3"]
        .iter()
        .enumerate()
        .map(|(i, threads)| {
            let d = tmp.path().join(format!("r{i}"));
            let o = run_env(
                &["solve", "--n", "30", "--m1", "3", "--m2", "3", "--precond", "p2d,p3d,p3t", "-o", d.to_str().unwrap()],
                &[("SADDLEPREC_THREADS", threads)],
            );
            assert_eq!(code(&o), 0);
            let o = run_env(
                &["spectrum", "--n", "30", "--m1", "3", "--m2", "3", "--precond", "p2d,p3d,p3t", "-o", d.join("s").to_str().unwrap()],
                &[("SADDLEPREC_THREADS", threads)],
            );
            assert_eq!(code(&o), 0);
            d
        })
        .collect();
    for name in ["solve_p2d.csv", "solve_p3d.csv", "solve_p3t.csv", "summary.csv", "run_manifest.json", "s/spectrum_p3t.json", "s/run_manifest.json"] {
        let h = sha(&dirs[0].join(name));
        assert_eq!(h, sha(&dirs[1].join(name)), "{name}");
        assert_eq!(h, sha(&dirs[2].join(name)), "{name}");
    }
}
