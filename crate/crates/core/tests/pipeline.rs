//! End-to-end runs of the `icfs` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use induced_coherence::fit::{analyze_map, build_visibility_map};
use induced_coherence::io::{read_json, read_visibility, EsfReport, RunConfig};
use induced_coherence::sim::{simulate_stack, Mode};

const SMALL: &str = "\
camera.width = 64
camera.height = 48
camera.pixel_pitch_ff = 3.2e-5
camera.pixel_pitch_nf = 4e-6
scan.frames = 64
";

fn icfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icfs"))
        .args(args)
        .output()
        .expect("spawn icfs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn oracle_single_check_passes() {
    let out = icfs(&["oracle", "--check", "mgvt"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("mgvt"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn oracle_reports_truncated_grid_as_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "oracle.span_sigmas = 3\n");
    let out = icfs(&["oracle", "--config", s(&cfg), "--check", "cond_var_momentum"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn oracle_rejects_unknown_check() {
    let out = icfs(&["oracle", "--check", "no_such_check"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn short_scan_is_rejected_with_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# short\n\nscan.frames = 4\n");
    let stack = dir.path().join("ff.icfs");
    let out = icfs(&["simulate", "--config", s(&cfg), "--mode", "ff", "--out", s(&stack)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scan.frames"), "{err}");
    assert!(err.contains(":3:"), "{err}");
    assert!(!stack.exists());
}

#[test]
fn pipeline_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg_path = write_config(d, SMALL);
    let cfg = RunConfig::load(&cfg_path).unwrap();

    for (mode, tag) in [(Mode::FarField, "ff"), (Mode::NearField, "nf")] {
        let stack = d.join(format!("{tag}.icfs"));
        let csv = d.join(format!("{tag}.csv"));
        let json = d.join(format!("{tag}.json"));
        let json1 = d.join(format!("{tag}-1.json"));
        let seed = "7";
        assert!(icfs(&["simulate", "--config", s(&cfg_path), "--mode", tag, "--seed", seed, "--out", s(&stack)])
            .status
            .success());
        assert!(icfs(&["visibility", s(&stack), "--out", s(&csv)]).status.success());
        assert!(icfs(&["esf", s(&csv), "--out", s(&json)]).status.success());
        assert!(icfs(&["esf", s(&csv), "--rows", "1", "--out", s(&json1)]).status.success());

        let lib = simulate_stack(&cfg.scene(mode), &cfg.camera(mode), &cfg.phase_scan(), 7).unwrap();
        let lib_map = build_visibility_map(&lib).unwrap();
        let (file_map, _) = read_visibility(&csv).unwrap();
        for (row, col) in [(0, 0), (24, 31), (47, 63), (10, 50)] {
            let a = file_map.get(row, col);
            let b = lib_map.get(row, col);
            assert_eq!(a.valid, b.valid);
            if b.valid {
                assert_eq!(a.visibility, b.visibility, "pixel ({row}, {col})");
                assert_eq!(a.phase, b.phase);
            }
        }

        let report: EsfReport = read_json(&json).unwrap();
        let direct = analyze_map(&lib_map, 20, None, None).unwrap();
        assert_eq!(report.d_m, direct.fit.width);
        let single: EsfReport = read_json(&json1).unwrap();
        let one = analyze_map(&lib_map, 1, None, None).unwrap();
        assert_eq!(single.rows, 1);
        assert_eq!(single.d_m, one.fit.width);
    }

    let out = icfs(&["verify", s(&d.join("ff.json")), s(&d.join("nf.json")), "--config", s(&cfg_path)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], "icfs.entanglement/1");
    assert!(v["epr_product"]["value"].as_f64().unwrap() > 0.0);

    // Swapped inputs are refused.
    let out = icfs(&["verify", s(&d.join("nf.json")), s(&d.join("ff.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write_config(d, SMALL);
    let run = |name: &str, seed: &str| {
        let p = d.join(name);
        assert!(icfs(&["simulate", "--config", s(&cfg), "--mode", "nf", "--seed", seed, "--out", s(&p)])
            .status
            .success());
        std::fs::read(p).unwrap()
    };
    let a = run("a.icfs", "3");
    let b = run("b.icfs", "3");
    let c = run("c.icfs", "4");
    assert_eq!(a, b);
    assert_ne!(a, c);
}
