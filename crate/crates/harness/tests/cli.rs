use std::path::Path;
use std::process::{Command, Output};

fn nlact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlact")).args(args).output().unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn census_output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let common = ["census", "--n-states", "300", "--seed", "9"];
    let run = |out: &Path, threads: &str| {
        let mut args = common.to_vec();
        args.extend(["--threads", threads, "--out", path_arg(out)]);
        nlact(&args)
    };
    assert!(run(&a, "1").status.success());
    assert!(run(&b, "3").status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("state_index,seed,stream_index,m_value"));
    assert_eq!(text.lines().count(), 301);
    assert!(dir.path().join("a.summary.csv").exists());
}

#[test]
fn sweep_json_with_config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.cfg");
    std::fs::write(&cfg, "n_states = 7\nsteps = 11\nchannel = ad\nformat = json\n").unwrap();
    let out = dir.path().join("s.json");
    let res = nlact(&["sweep", "--config", path_arg(&cfg), "--channel", "d", "--out", path_arg(&out), "--per-step"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["experiment"], "decoherence_sweep");
    assert_eq!(v["summary"]["channel"], "d");
    assert_eq!(v["summary"]["n_states"], 7);
    assert_eq!(v["records"].as_array().unwrap().len(), 7);
    assert_eq!(v["steps"].as_array().unwrap().len(), 77);
    assert!(String::from_utf8_lossy(&res.stdout).contains("pct_nlr_states = "));
}

#[test]
fn verify_and_extension_exit_zero() {
    let res = nlact(&["verify"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("all_passed = true"));
    assert_eq!(nlact(&["extension", "--k", "4"]).status.code(), Some(0));
}

#[test]
fn iso_curve_has_201_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("iso.csv");
    assert!(nlact(&["iso-curve", "--out", path_arg(&out)]).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 202);
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(nlact(&["census", "--n-states", "0"]).status.code(), Some(2));
    assert_eq!(nlact(&["sweep", "--channel", "xyz"]).status.code(), Some(2));
    assert_eq!(nlact(&["sweep", "--steps", "1"]).status.code(), Some(2));
    assert_eq!(nlact(&["verify", "--p", "1.5"]).status.code(), Some(2));
    assert_eq!(nlact(&["launch"]).status.code(), Some(2));
    assert_eq!(nlact(&["extension", "--k", "7"]).status.code(), Some(2));
}

#[test]
fn io_failures_exit_three_and_leave_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("c.csv");
    let res = nlact(&["census", "--n-states", "5", "--out", path_arg(&out)]);
    assert_eq!(res.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&res.stderr).contains("missing"));
    assert!(!out.exists());
    let res = nlact(&["census", "--config", path_arg(&dir.path().join("absent.cfg"))]);
    assert_eq!(res.status.code(), Some(3));
}
