use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const EVAL: &str = r#"
[experiment]
kind = "eval"
game = "factoring"
samples = 8
seed = 3
eps = 0.05
delta = 0.0025

[strategies]
player1 = "alice_random:10"
player2 = "pollard_rho"
"#;

fn dtg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtg")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn eval_succeeds_and_replays() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "eval.toml", EVAL);
    let out = tmp.path().join("run").display().to_string();
    let o = dtg(&["eval", &cfg, "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(&out).join("manifest.json").exists());

    let r = dtg(&["replay", &out]);
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stdout).contains("replay: identical"));
}

#[test]
fn seed_override_changes_results() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "eval.toml", EVAL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(code(&dtg(&["run", &cfg, "--out", a.to_str().unwrap(), "--seed", "1"])), 0);
    assert_eq!(code(&dtg(&["run", &cfg, "--out", b.to_str().unwrap(), "--seed", "2", "--samples", "9"])), 0);
    let ta = fs::read_to_string(a.join("trajectory.csv")).unwrap();
    let tb = fs::read_to_string(b.join("trajectory.csv")).unwrap();
    assert_ne!(ta, tb);
}

#[test]
fn validation_errors_exit_one_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = write(
        tmp.path(),
        "empty_libs.toml",
        "[experiment]\nkind = \"solve\"\ngame = \"largest_integer\"\neps = 0.1\ndelta = 0.1\n\n[libraries]\nplayer1 = [\"ones:0\"]\nplayer2 = []\n",
    );
    let out = tmp.path().join("o").display().to_string();
    let o = dtg(&["run", &empty, "--out", &out]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 9"), "{}", String::from_utf8_lossy(&o.stderr));

    let typo = write(tmp.path(), "typo.toml", &EVAL.replace("samples = 8", "sample = 8"));
    let o = dtg(&["eval", &typo, "--out", &out]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"), "{}", String::from_utf8_lossy(&o.stderr));

    assert_eq!(code(&dtg(&["run", "/nonexistent/config.toml"])), 1);
    assert_eq!(code(&dtg(&["replay", "/nonexistent/run"])), 1);
}

#[test]
fn runtime_failure_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "eval.toml", EVAL);
    let out = tmp.path().join("run");
    fs::create_dir_all(out.join("trajectory.csv")).unwrap();
    assert_eq!(code(&dtg(&["eval", &cfg, "--out", out.to_str().unwrap()])), 2);
}

#[test]
fn replay_reports_divergence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "eval.toml", EVAL);
    let out = tmp.path().join("run");
    assert_eq!(code(&dtg(&["eval", &cfg, "--out", out.to_str().unwrap()])), 0);
    let c = out.join("config.toml");
    fs::write(&c, fs::read_to_string(&c).unwrap().replace("samples = 8", "samples = 12")).unwrap();
    let r = dtg(&["replay", out.join("manifest.json").to_str().unwrap()]);
    assert_eq!(code(&r), 2);
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("trajectory.csv") && text.contains("DIVERGED"));
}
