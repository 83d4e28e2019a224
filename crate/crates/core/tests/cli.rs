//! End-to-end runs of the `spotvol` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spotvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spotvol")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(p: &Path) -> usize {
    fs::read_to_string(p).unwrap().lines().count() - 1
}

const OU_SIM: &str = r#"
[model]
tag = "OuVol"
r = 0.05
a = 1.0
m = 0.05
beta_vol = 0.05
rho = 0.0
x0 = 3.912023005428146
v0 = 0.05

[simulate]
n = 100
t_end = 1.0
oversample = 100
seed = 3
"#;

#[test]
fn simulate_writes_path_and_observations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ou.toml", OU_SIM);
    let out = dir.path().join("a");
    let o = spotvol(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    // 1 + t_end / dt_fine fine points, 1 + t_end / delta_n observations
    assert_eq!(data_rows(&out.join("path.csv")), 10_001);
    assert_eq!(data_rows(&out.join("observations.csv")), 101);
    let head = fs::read_to_string(out.join("path.csv")).unwrap();
    assert!(head.starts_with("t,x,v\n"));

    let again = dir.path().join("b");
    let o = spotvol(&["simulate", "--config", &cfg, "--out", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("path.csv")).unwrap(), fs::read(again.join("path.csv")).unwrap());

    let other = dir.path().join("c");
    let o = spotvol(&["simulate", "--config", &cfg, "--seed", "4", "--out", other.to_str().unwrap()]);
    assert!(o.status.success());
    assert_ne!(fs::read(out.join("path.csv")).unwrap(), fs::read(other.join("path.csv")).unwrap());
}

#[test]
fn unstable_jump_scheme_is_refused_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bns.toml",
        "[model]\ntag = \"BnsJump\"\nr = 0.0\nmu = 5000.0\nx0 = 0.0\nv0 = 0.05\n\
         [model.ts]\nlambda = 2.0\nbeta = 0.5\n[simulate]\nn = 1000\noversample = 1\n",
    );
    let out = dir.path().join("o");
    let o = spotvol(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error kind=config key=model.mu "), "{err}");
    assert!(!out.join("path.csv").exists());
}

#[test]
fn invalid_experiment_key_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "x.toml",
        "[model]\ntag = \"ConstantVol\"\nsigma = 0.2\n[experiment]\nmode = \"error_table\"\n\
         n_values = [1000]\nrho_values = [1.5]\np_values = [2.0]\nn_paths = 4\n",
    );
    let o = spotvol(&["experiment", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("key=experiment.rho_values"), "{}", stderr(&o));
}

#[test]
fn estimate_from_files_with_and_without_truth() {
    let dir = tempfile::tempdir().unwrap();
    let sim = write(
        dir.path(),
        "c.toml",
        "[model]\ntag = \"ConstantVol\"\nsigma = 0.2\n[simulate]\nn = 10000\noversample = 1\nseed = 9\n",
    );
    let d = dir.path().to_str().unwrap();
    assert!(spotvol(&["simulate", "--config", &sim, "--out", d]).status.success());
    let obs = dir.path().join("observations.csv");
    let path = dir.path().join("path.csv");

    let est = write(
        dir.path(),
        "e.toml",
        &format!(
            "[estimate]\nobservations = {:?}\ntruth = {:?}\np = 2.0\nrho = 0.5\n",
            obs.to_str().unwrap(),
            path.to_str().unwrap()
        ),
    );
    let out = dir.path().join("with");
    let o = spotvol(&["estimate", "--config", &est, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("estimate.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,sigma_p_hat,sigma_hat,ci_lo,ci_hi,sigma_true,rel_err");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let mean = rows.iter().map(|r| r[2]).sum::<f64>() / rows.len() as f64;
    // windows of 100 observations: relative sd of sigma_hat is about 7%
    assert!((mean - 0.2).abs() < 0.01, "{mean}");
    for r in &rows {
        assert!(r[3] <= r[2] && r[2] <= r[4]);
        assert_eq!(r[5], 0.2);
    }

    let est = write(
        dir.path(),
        "e2.toml",
        &format!("[estimate]\nobservations = {:?}\np = 2.5\nh_n = 0.01\n", obs.to_str().unwrap()),
    );
    let out = dir.path().join("without");
    let o = spotvol(&["estimate", "--config", &est, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning: p = 2.5 is LLN-only"));
    let text = fs::read_to_string(out.join("estimate.csv")).unwrap();
    assert!(text.starts_with("t,sigma_p_hat,sigma_hat,ci_lo,ci_hi\n"));
}

#[test]
fn presets_are_listed_and_printed() {
    let o = spotvol(&["presets"]);
    assert!(o.status.success());
    let names = String::from_utf8(o.stdout).unwrap();
    for n in ["paper_table_5_1", "paper_table_5_2", "coverage_default", "rate_fit_jump"] {
        assert!(names.lines().any(|l| l == n), "{n}");
    }
    let o = spotvol(&["presets", "paper_table_5_1"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("mode = \"error_table\""));
    assert_eq!(spotvol(&["presets", "nope"]).status.code(), Some(2));
}

#[test]
fn preset_experiment_with_one_path_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = spotvol(&[
            "experiment",
            "--preset",
            "paper_table_5_1",
            "--n-paths",
            "1",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("report.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
}
