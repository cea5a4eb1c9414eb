use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn atfe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atfe"))
        .args(args)
        .env_remove("ATFE_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn max_ramsey_bound_value() {
    let o = atfe(&["bounds", "--kind", "qcrb_max_ramsey", "--nu", "1", "--n", "1", "--delta-omega", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let value: f64 = text.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(format!("{value:.6}"), "0.405285");
}

#[test]
fn bounds_sweep_writes_file_under_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = atfe(&["bounds", "--kind", "atfe-step-bound", "--s", "1:4", "--confidence", "0.99,0.999", "--n", "1", "--output-dir", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let file = fs::read_to_string(dir.path().join("bounds_atfe_step_bound.csv")).unwrap();
    assert_eq!(file, stdout(&o));
    assert_eq!(file.lines().count(), 1 + 8);
    assert!(file.starts_with("s,confidence,n,value\n"));
}

#[test]
fn schedule_reports_s1_near_five() {
    let o = atfe(&["schedule", "--confidence", "0.99"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let s1: f64 = text.lines().find(|l| l.starts_with("S1,")).unwrap()[3..].parse().unwrap();
    assert_eq!(s1.round(), 5.0);
    assert!(text.starts_with("i,nu_min,t_tilde\n1,9,0.25\n"));
}

#[test]
fn exit_code_contract() {
    let o = atfe(&["simulate"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.contains("nu_total required"));

    assert_eq!(atfe(&["simulate", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(atfe(&["bounds", "--kind", "qcrb_max_ramsey", "--nu", "1"]).status.code(), Some(2));
    assert_eq!(atfe(&["reproduce", "fig4"]).status.code(), Some(2));
    assert_eq!(atfe(&["simulate", "--nu-total", "5", "--set", "nu_initial=9"]).status.code(), Some(2));
    assert_eq!(atfe(&["simulate", "--nu-total", "5", "--workers", "0"]).status.code(), Some(2));
    let o = atfe(&["bounds", "--kind", "atfe_ideal_bound", "--nu", "2", "--confidence", "0.999", "--n", "1", "--s", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(atfe(&["--help"]).status.success());
}

fn read_sidecar(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_layers_config_and_echo_reparses() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "nu_total = 12\nnu_initial = 4\nmode = \"ghz\"\nn_qubits = 2\ntrials_per_batch = 3\nbatches = 2\ntag = \"demo\"\n").unwrap();
    let out = dir.path().join("out");
    let o = atfe(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--set", "n_qubits=3", "--set", "seed=5",
        "--seed", "9", "--output-dir", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let side = read_sidecar(&out.join("simulate_demo.json"));
    let config = &side["config"];
    assert_eq!(config["n_qubits"], 3);
    assert_eq!(config["seed"], 9, "flags win over --set");
    assert_eq!(config["mode"], "ghz");
    assert_eq!(side["master_seed"], 9);
    let csv = fs::read_to_string(out.join("simulate_demo.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    assert_eq!(csv.lines().last().unwrap().split(',').nth(4).unwrap(), "36");

    // the echoed config, fed back as a config file, reproduces the run
    let echo = dir.path().join("echo.json");
    fs::write(&echo, serde_json::to_string(config).unwrap()).unwrap();
    let out2 = dir.path().join("out2");
    let o = atfe(&["simulate", "--config", echo.to_str().unwrap(), "--output-dir", out2.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_sidecar(&out2.join("simulate_demo.json")), side);
    assert_eq!(fs::read(out2.join("simulate_demo.csv")).unwrap(), csv.as_bytes());
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_atfe"))
        .args(["reproduce", "fig2_likelihood"])
        .env("ATFE_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("reproduce_fig2_likelihood_curves.csv").exists());
    let side = read_sidecar(&dir.path().join("reproduce_fig2_likelihood.json"));
    assert_eq!(side["results"]["local_maxima"], serde_json::json!([1, 2, 3]));
}
