use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixtrack(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fixtrack"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn export(id: u32, dir: &Path) -> String {
    let o = fixtrack(&["export-example", &id.to_string()], dir);
    assert!(o.status.success());
    stdout(&o)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_example_writes_csv_and_report() {
    let tmp = TempDir::new().unwrap();
    let o = fixtrack(&["run-example", "1", "--out", "res"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: converged"));
    let csv = fs::read_to_string(tmp.path().join("res/example-1.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,agent_id,x,v,u,alpha,beta,err_pos,err_vel,s,V1,V_obs"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[2].parse::<f64>().unwrap(), 200.0);
    assert!(tmp.path().join("res/example-1_report.txt").exists());
}

#[test]
fn unknown_example_is_invalid() {
    let tmp = TempDir::new().unwrap();
    let o = fixtrack(&["run-example", "7"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown example 7"));
}

#[test]
fn validate_example_two_passes() {
    let tmp = TempDir::new().unwrap();
    let f = write(tmp.path(), "ex2.toml", &export(2, tmp.path()));
    let o = fixtrack(&["validate", &f], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("lambda1(Q) = "));
    assert!(out.contains("all checks passed"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn validate_flags_small_b2() {
    let tmp = TempDir::new().unwrap();
    let text = export(2, tmp.path()).replace("b2 = 1.0", "b2 = 0.5");
    let f = write(tmp.path(), "weak.toml", &text);
    let o = fixtrack(&["validate", &f], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("[FAIL] b2 = 0.5 >= 1"), "{}", stdout(&o));
}

#[test]
fn validate_directed_shows_c2_threshold() {
    let tmp = TempDir::new().unwrap();
    let text = export(3, tmp.path()).replace("c2 = 121.0", "c2 = 34.0");
    let f = write(tmp.path(), "chain.toml", &text);
    let o = fixtrack(&["validate", &f], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.contains("[FAIL] c2 = 34")).expect("c2 line");
    let threshold: f64 = line.split(">= ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((threshold - 120.98).abs() < 0.01, "{line}");
    assert!(out.contains("p = [4, 3, 2, 1]"), "{out}");
}

#[test]
fn disconnected_topology_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let text = export(2, tmp.path()).replace("edges = [[1, 2], [1, 4], [2, 3], [3, 4]]", "edges = [[1, 2], [3, 4]]");
    let f = write(tmp.path(), "split.toml", &text);
    let o = fixtrack(&["run", &f], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("undirected and connected"), "{}", stderr(&o));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn forced_run_reports_violation() {
    let tmp = TempDir::new().unwrap();
    let text = export(2, tmp.path())
        .replace("c2 = 8.0", "c2 = 5.0")
        .replace("horizon = 11.0", "horizon = 9.0");
    let f = write(tmp.path(), "under.toml", &text);
    let o = fixtrack(&["run", &f], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = fixtrack(&["run", &f, "--force", "--dt", "0.0005"], tmp.path());
    assert!(o.status.code() != Some(2), "{}", stderr(&o));
    let report = fs::read_to_string(tmp.path().join("out/example-2_report.txt")).unwrap();
    assert!(report.contains("violated: gain: [FAIL] c2 = 5"), "{report}");
}

#[test]
fn parse_errors_carry_location() {
    let tmp = TempDir::new().unwrap();
    let text = export(1, tmp.path()).replace("rho = 2.0", "rho = 2.0\nrhoo = 3");
    let f = write(tmp.path(), "typo.toml", &text);
    let o = fixtrack(&["run", &f], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line "), "{}", stderr(&o));
}

#[test]
fn dt_must_divide_stage_durations() {
    let tmp = TempDir::new().unwrap();
    let o = fixtrack(&["run-example", "1", "--dt", "0.0007"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not a multiple of dt"));
}

#[test]
fn several_files_with_jobs() {
    let tmp = TempDir::new().unwrap();
    let a = write(tmp.path(), "a.toml", &export(1, tmp.path()).replace("\"example-1\"", "\"a\""));
    let b = write(tmp.path(), "b.toml", &export(3, tmp.path()).replace("\"example-3\"", "\"b\""));
    let o = fixtrack(&["run", &a, &b, "--jobs", "2", "--dt", "0.001"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(tmp.path().join("out/a.csv").exists());
    assert!(tmp.path().join("out/b.csv").exists());
}

#[test]
fn seed_override_changes_initial_states() {
    let tmp = TempDir::new().unwrap();
    fixtrack(&["run-example", "2", "--out", "s1", "--seed", "1", "--dt", "0.001"], tmp.path());
    fixtrack(&["run-example", "2", "--out", "s2", "--seed", "2", "--dt", "0.001"], tmp.path());
    let a = fs::read_to_string(tmp.path().join("s1/example-2.csv")).unwrap();
    let b = fs::read_to_string(tmp.path().join("s2/example-2.csv")).unwrap();
    assert_ne!(a.lines().nth(1), b.lines().nth(1));
}
