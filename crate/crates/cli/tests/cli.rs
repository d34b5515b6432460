//! End-to-end tests of the `nldist` binary: file round trips, CSV
//! determinism, and the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

use nldist_core::NsBox;

fn nldist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nldist"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn nldist_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nldist"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn gen_emits_the_documented_nonlocal_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = nldist_in(
        dir.path(),
        &["gen", "--family", "nl", "--d", "3", "-o", "nl3.json"],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("nl3.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["d"], 3);
    let mut entries = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    entries.push(parsed["p"][x][y][a][b].as_f64().unwrap());
                }
            }
        }
    }
    assert_eq!(entries.len(), 36);
    assert_eq!(entries.iter().filter(|v| **v == 1.0 / 3.0).count(), 12);
    assert_eq!(entries.iter().filter(|v| **v == 0.0).count(), 24);
}

#[test]
fn gen_then_cglmp_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    // A mixture exercises non-trivial floats, not just 0 and 1/d.
    let gen = nldist_in(
        dir.path(),
        &[
            "gen",
            "--family",
            "lc",
            "--d",
            "4",
            "--epsilon",
            "0.37",
            "-o",
            "mix.json",
        ],
    );
    assert!(gen.status.success());
    let report = stdout_of(&nldist_in(dir.path(), &["cglmp", "--input", "mix.json"]));
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();

    let nl = NsBox::nonlocal(4).unwrap();
    let lc = NsBox::local_correlated(4).unwrap();
    let expected = NsBox::mix(&[nl, lc], &[0.37, 1.0 - 0.37]).unwrap().cglmp();
    let got = parsed["value"].as_f64().unwrap();
    assert_eq!(
        got.to_bits(),
        expected.to_bits(),
        "value drifted through the file: {got} vs {expected}"
    );
}

#[test]
fn csv_outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sweep_args = [
        "sweep",
        "--protocol",
        "A",
        "--protocol",
        "B",
        "--d",
        "2,5,inf",
        "--steps",
        "17",
    ];
    let first = stdout_of(&nldist_in(dir.path(), &sweep_args));
    let second = stdout_of(&nldist_in(dir.path(), &sweep_args));
    assert_eq!(first, second);
    assert!(first.starts_with("protocol,d,epsilon,cglmp_initial,cglmp_final\n"));
    assert!(first.lines().any(|l| l.starts_with("A,inf,")));

    let region_args = ["region", "--d", "inf", "--grid", "40"];
    let first = stdout_of(&nldist_in(dir.path(), &region_args));
    let second = stdout_of(&nldist_in(dir.path(), &region_args));
    assert_eq!(first, second);
    assert!(first.starts_with("xi,gamma,d,cglmp_initial,cglmp_final,works\n"));
    assert!(first.lines().any(|l| l.ends_with(",true")));
    assert!(first.lines().any(|l| l.ends_with(",false")));

    // Thread cap must not change the bytes either.
    let capped = Command::new(env!("CARGO_BIN_EXE_nldist"))
        .current_dir(dir.path())
        .env("NLDIST_THREADS", "2")
        .args(region_args)
        .output()
        .unwrap();
    assert_eq!(first, stdout_of(&capped));
}

#[test]
fn region_supports_finite_dimensions_too() {
    let out = stdout_of(&nldist(&["region", "--d", "3", "--grid", "5"]));
    assert!(out
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(2) == Some("3")));
}

#[test]
fn usage_errors_exit_2() {
    let cases: &[&[&str]] = &[
        &["gen", "--family", "nl", "--d", "inf"],
        &["gen", "--family", "nl", "--d", "1"],
        &["gen", "--family", "nl", "--d", "3", "--epsilon", "0.5"],
        &["gen", "--family", "lc", "--d", "3", "--epsilon", "1.5"],
        &["cglmp", "--family", "nl"],
        &["cglmp", "--family", "nl", "--d", "3", "--tol", "0"],
        &["cglmp"],
        &[
            "distill",
            "--protocol",
            "C",
            "--family",
            "ld",
            "--epsilon",
            "0.4",
            "--d",
            "3",
        ],
        &[
            "distill",
            "--protocol",
            "B",
            "--family",
            "ld",
            "--epsilon",
            "0.4",
            "--d",
            "inf",
        ],
        &[
            "iterate",
            "--protocol",
            "B",
            "--epsilon",
            "0.3",
            "--d",
            "2",
            "--rounds",
            "3",
            "--family",
            "lc",
        ],
        &["noisy", "--xi", "0.7", "--gamma", "0.7", "--d", "3"],
        &["sweep", "--steps", "7"],
        &["sweep", "--d", "2", "--steps", "1"],
        &["region", "--d", "1"],
        &["verify", "--suite", "bogus"],
        &["verify", "--tol-oracle", "-1"],
        &["verify", "--samples", "0"],
        &["frobnicate"],
    ];
    for args in cases {
        let out = nldist(args);
        assert_eq!(exit_code(&out), 2, "expected usage failure for {args:?}");
    }

    let out = Command::new(env!("CARGO_BIN_EXE_nldist"))
        .env("NLDIST_THREADS", "zebra")
        .args(["verify", "--suite", "basis"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn missing_input_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = nldist_in(dir.path(), &["cglmp", "--input", "no-such-box.json"]);
    assert_eq!(exit_code(&out), 2);
    std::fs::write(dir.path().join("garbage.json"), "{\"d\": 3").unwrap();
    let out = nldist_in(dir.path(), &["cglmp", "--input", "garbage.json"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn verification_failure_exits_1_and_success_0() {
    let ok = nldist(&["verify", "--suite", "basis"]);
    assert_eq!(exit_code(&ok), 0);
    let text = stdout_of(&ok);
    assert!(text.contains("[PASS] basis-cglmp-values"));
    assert!(text
        .trim_end()
        .ends_with("0 failed (suite basis, seed 20260814)"));

    // An impossible tolerance makes real residuals count as failures.
    let bad = nldist(&["verify", "--suite", "protocols", "--tol-oracle", "1e-18"]);
    assert_eq!(exit_code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("[FAIL]"));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("verification checks failed"));
}

#[test]
fn wiring_override_composes_with_the_named_comparator() {
    // Distilling a deterministic-family mixture with A's offset-0 wiring
    // via override must match what protocol B reports as its own result
    // when the override names comparator-B.
    let dir = tempfile::tempdir().unwrap();
    let own = stdout_of(&nldist_in(
        dir.path(),
        &[
            "distill",
            "--protocol",
            "B",
            "--family",
            "ld",
            "--epsilon",
            "0.4",
            "--d",
            "2",
        ],
    ));
    let own: serde_json::Value = serde_json::from_str(&own).unwrap();
    assert_eq!(own["wiring"], "comparator-B");
    assert!((own["epsilon_predicted"].as_f64().unwrap() - 0.64).abs() < 1e-12);

    let overridden = stdout_of(&nldist_in(
        dir.path(),
        &[
            "distill",
            "--protocol",
            "A",
            "--family",
            "ld",
            "--epsilon",
            "0.4",
            "--d",
            "2",
            "--wiring",
            "comparator-B",
        ],
    ));
    let overridden: serde_json::Value = serde_json::from_str(&overridden).unwrap();
    assert_eq!(overridden["wiring"], "comparator-B");
    // Same composition, so the same final value; but no closed form is
    // attached because the wiring is not protocol A's own.
    assert_eq!(
        overridden["cglmp_final"].as_f64().unwrap().to_bits(),
        own["cglmp_final"].as_f64().unwrap().to_bits()
    );
    assert!(overridden.get("epsilon_predicted").is_none());
}

#[test]
fn wiring_files_load_and_compose() {
    let dir = tempfile::tempdir().unwrap();
    // comparator-B at d=2, spelled out as a file.
    let wiring = r#"{
        "d": 2,
        "fa": [[0, 0], [0, 1]],
        "fb": [[0, 0], [0, 1]],
        "ga": [[1, 0], [0, 1]],
        "gb": [[1, 0], [0, 1]]
    }"#;
    std::fs::write(dir.path().join("w.json"), wiring).unwrap();
    let out = stdout_of(&nldist_in(
        dir.path(),
        &[
            "distill",
            "--protocol",
            "B",
            "--family",
            "ld",
            "--epsilon",
            "0.4",
            "--d",
            "2",
            "--wiring",
            "w.json",
        ],
    ));
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    let expected = 2.0 + 2.0 * (2.0 * 0.4 - 0.4 * 0.4);
    assert!((parsed["cglmp_final"].as_f64().unwrap() - expected).abs() <= 1e-12);

    // Dimension mismatch between wiring file and box is a usage error.
    let out = nldist_in(
        dir.path(),
        &[
            "distill",
            "--protocol",
            "B",
            "--family",
            "ld",
            "--epsilon",
            "0.4",
            "--d",
            "3",
            "--wiring",
            "w.json",
        ],
    );
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn closed_stdout_pipe_is_not_an_error() {
    use std::io::Read;
    let mut child = Command::new(env!("CARGO_BIN_EXE_nldist"))
        .args(["region", "--d", "inf", "--grid", "300"])
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut head = [0u8; 64];
    child.stdout.take().unwrap().read_exact(&mut head).unwrap();
    // Dropping the read end closes the pipe mid-stream; the binary should
    // treat the resulting EPIPE as a quiet success, like any Unix filter.
    let status = child.wait().unwrap();
    assert!(status.success(), "exit {:?}", status.code());
    let mut err = String::new();
    child
        .stderr
        .take()
        .unwrap()
        .read_to_string(&mut err)
        .unwrap();
    assert!(err.is_empty(), "stderr: {err}");
}

#[test]
fn verify_all_passes_with_a_trimmed_sample_budget() {
    let out = nldist(&["verify", "--suite", "all", "--samples", "64"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_of(&out);
    assert_eq!(text.matches("[PASS]").count(), 25);
    assert!(text.contains("xi2-coefficient-adjudication"));
    assert!(text.contains("above the algebraic maximum 4"));
}
