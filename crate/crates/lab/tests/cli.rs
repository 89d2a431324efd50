use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cohomolab")).args(args).env_remove("COHOMOLAB_JOBS").output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cohomolab-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["cohomology", "--preset", "Z2", "--rep", "char:1/2"]), 0);
    assert_eq!(code(&["cohomology", "--preset", "/no/such/presentation"]), 2);
    assert_eq!(code(&["cohomology", "--preset", "Z", "--rep", "/no/such/rep"]), 2);
    assert_eq!(code(&["sweep", "--eps", "0.1,0.01"]), 2);
    assert_eq!(code(&["sweep", "--preset", "Z2", "--rep", "char:1/2", "--strategy", "flatten"]), 2);
    assert_eq!(code(&["sweep", "--preset", "Z2", "--rep", "char:1/2", "--strategy", "bogus"]), 2);
    assert_eq!(code(&["cohomology", "--preset", "Z3", "--rep", "char:1/4"]), 3);
    assert_eq!(code(&["sweep", "--preset", "Z", "--rep", "circle:8", "--strategy", "flatten", "--eps", "1"]), 3);
    assert_eq!(code(&["verify", "--only", "nope"]), 2);
}

#[test]
fn broken_rank_tolerance_fails_verify() {
    let out = run(&["verify", "--rank-tol", "1e3", "--only", "torus,laplacian,euler"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL [torus]") && text.contains("FAIL [laplacian]"), "{text}");
    assert_eq!(code(&["verify", "--only", "torus,kazhdan,weil"]), 0);
}

#[test]
fn zero_epsilon_sweep_is_the_identity() {
    let out = run(&["sweep", "--preset", "Z2", "--rep", "char:1/2", "--degree", "1", "--eps", "0", "--trials", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).take(2).collect();
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 12);
        assert_eq!(f[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(f[11], "true");
    }
    assert!(text.lines().any(|l| l.starts_with("summary,0.0000000000000000e0,")));
}

#[test]
fn config_file_and_out_dir() {
    let dir = scratch("cfg");
    let cfg = dir.join("run.conf");
    std::fs::write(&cfg, "preset = \"Z2\"\nrep = \"char:1/2\"\ndegree = 1\ntrials = 2\neps = 0.01\n").unwrap();
    let out_dir = dir.join("out");
    let out = run(&["--config", cfg.to_str().unwrap(), "--trials", "3", "--out", out_dir.to_str().unwrap(), "sweep"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 3);
    let out = run(&["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "cohomology"]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("cohomology.json")).unwrap()).unwrap();
    let dims: Vec<i64> = json["degrees"].as_array().unwrap().iter().map(|d| d["dim_h"].as_i64().unwrap()).collect();
    assert_eq!(dims, vec![0, 0, 0]);
    assert_eq!(json["degrees"][2]["kappa"], "inf");
}

#[test]
fn scaling_table() {
    let out = run(&["scaling", "--n-list", "5,12"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "5");
    let kappa: f64 = row[1].parse().unwrap();
    assert!((kappa - 2.0 * (std::f64::consts::PI / 5.0).sin()).abs() < 1e-12);
    assert_eq!(row[5], "1");
    assert_eq!(code(&["scaling", "--n-list", "2"]), 2);
}

#[test]
fn weil_certificates() {
    let out = run(&["weil", "--preset", "Z3", "--rep", "char:1/3"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("locally rigid"));
    let out = run(&["weil", "--preset", "Z", "--rep", "rot:1/7"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("not certified"));
}
