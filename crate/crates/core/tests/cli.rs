//! End-to-end runs of the `latdisp` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn latdisp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latdisp"))
        .args(args)
        .output()
        .expect("spawn latdisp")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("latdisp-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn free_operator_is_resonant_at_both_edges() {
    let out = latdisp(&["resonance", "-p", "zero"]);
    assert!(out.status.success());
    let v = json(&out);
    for edge in v["edges"].as_array().unwrap() {
        assert_eq!(edge["flag"]["resonant"], true, "{edge}");
    }
}

#[test]
fn delta_has_one_bound_state() {
    let out = latdisp(&["bound-states", "-p", "delta:2"]);
    assert!(out.status.success());
    let states = json(&out)["bound_states"].as_array().unwrap().clone();
    assert_eq!(states.len(), 1);
    let omega = states[0]["omega"].as_f64().unwrap();
    assert!(
        (omega - 2.0 * 2f64.sqrt() - 2.0).abs() < 1e-9,
        "ω = {omega}"
    );
}

#[test]
fn evolve_writes_one_kernel_per_time() {
    let dir = scratch("evolve");
    let out = latdisp(&[
        "--out",
        dir.to_str().unwrap(),
        "evolve",
        "-p",
        "zero",
        "--t",
        "1,5",
        "--window",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in ["kernel_000.csv", "kernel_001.csv", "manifest.json"] {
        assert!(dir.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(dir.join("kernel_000.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7 * 7);
}

#[test]
fn decay_exit_code_follows_the_check() {
    let dir = scratch("decay");
    let cfg = dir.join("tiny.cfg");
    let body = |slope: &str| {
        format!(
            "label = tiny\nnorm = l1_to_linf\npotential = zero\nt_min = 10\nt_max = 1000\n\
             t_count = 8\nexpected_slope = {slope}\ntolerance = 0.05\n"
        )
    };
    let run = || {
        latdisp(&[
            "--out",
            dir.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "decay",
        ])
    };

    fs::write(&cfg, body("-0.3333")).unwrap();
    let pass = run();
    assert_eq!(pass.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&pass.stdout).starts_with("PASS tiny"));
    assert!(dir.join("tiny.csv").exists() && dir.join("tiny.json").exists());

    fs::write(&cfg, body("-1.0")).unwrap();
    let fail = run();
    assert_eq!(fail.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fail.stdout).starts_with("FAIL tiny"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = scratch("bad");
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "label = x\nfoo = 1\n").unwrap();
    let out = latdisp(&["--config", cfg.to_str().unwrap(), "decay"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = latdisp(&["decay", "--preset", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}
