//! End-to-end checks of the binary: exit codes, config errors with named
//! keys, and the reproducibility contract (criterion 9): re-running from an
//! emitted provenance file is bit-identical, independent of worker count.

use std::path::Path;
use std::process::{Command, Output};

fn splitnvd(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitnvd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn dmt_curve_prints_caption_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitnvd(
        &["dmt-curve", "--subchannels", "2", "--tx", "2", "--rx", "2"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("0,8,8"), "{text}");
    assert!(text.contains("1,3,2"), "{text}");
    assert!(text.contains("2,0,0"), "{text}");
    assert!(text.contains("d(1) = 3 split vs 2 parallel"), "{text}");
}

#[test]
fn missing_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitnvd(&["wer", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.toml"));
}

#[test]
fn unknown_config_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[sim]\nchicken = 1\n").unwrap();
    let out = splitnvd(&["wer", "--config", "bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("chicken"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn wer_without_code_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitnvd(&["wer", "--trials", "10", "--snr", "10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("scheme"), "{}", stderr(&out));
}

#[test]
fn desk_scale_guard_exits_2_naming_the_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitnvd(
        &[
            "wer",
            "--scheme",
            "block-diag-nvd",
            "--bits",
            "4",
            "--snr",
            "10",
            "--trials",
            "10",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("4294967296"), "{}", stderr(&out));
}

#[test]
fn verify_lemma2_reports_zero_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitnvd(
        &["verify", "lemma2", "--instances", "200", "--seed", "7"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("0 violations"), "{}", stdout(&out));
}

#[test]
fn min_det_reports_golden_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitnvd(
        &["nvd", "min-det", "--scheme", "block-diag-nvd", "--bits", "1"],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("min |det|^2 = 6400"), "{}", stdout(&out));
}

#[test]
fn nvd_criterion_schedule_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = splitnvd(
        &[
            "nvd",
            "criterion",
            "--scheme",
            "split-nvd",
            "--bits",
            "1,2",
            "--mult-gain",
            "1",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("schedule exponent"), "{}", stdout(&out));
}

/// Criterion 9: outputs embed the resolved config; re-running from the
/// emitted JSON reproduces both files byte-for-byte at any worker count.
#[test]
fn provenance_roundtrip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = splitnvd(
        &[
            "wer",
            "--scheme",
            "split-nvd",
            "--bits",
            "1",
            "--snr",
            "0:8:4",
            "--trials",
            "512",
            "--seed",
            "9",
            "--out",
            "a",
            "--workers",
            "2",
        ],
        dir.path(),
    );
    assert!(first.status.success(), "{}", stderr(&first));
    let second = splitnvd(
        &["wer", "--config", "a.json", "--out", "b", "--workers", "1"],
        dir.path(),
    );
    assert!(second.status.success(), "{}", stderr(&second));

    let a_json = std::fs::read(dir.path().join("a.json")).unwrap();
    let b_json = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a_json, b_json, "JSON provenance differs between runs");
    let a_csv = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b_csv = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a_csv, b_csv, "CSV output differs between runs");

    // The CSV embeds the resolved config on its comment line.
    let text = String::from_utf8(a_csv).unwrap();
    assert!(text.starts_with("# config: {"), "{text}");
    assert!(text.contains("\"seed\":9"), "{text}");
    println!("criterion 9 PASS: provenance roundtrip bit-identical across worker counts");
}

#[test]
fn explicit_correlation_file_is_resolved_into_provenance() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("R.csv"), "1, 0.5+0.3j\n0.5-0.3j, 1\n").unwrap();
    let out = splitnvd(
        &[
            "outage",
            "--subchannels",
            "2",
            "--correlation",
            "file:R.csv",
            "--rate",
            "1.0",
            "--snr",
            "10,14",
            "--trials",
            "2000",
            "--seed",
            "4",
            "--out",
            "corr",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    // The provenance embeds the resolved matrix, not the file path.
    let text = std::fs::read_to_string(dir.path().join("corr.json")).unwrap();
    assert!(text.contains("explicit"), "{text}");
    assert!(text.contains("0.3"), "{text}");

    let bad = splitnvd(
        &[
            "outage",
            "--subchannels",
            "2",
            "--correlation",
            "file:nope.csv",
            "--rate",
            "1.0",
        ],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn outage_config_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        r#"
[channel]
rx = 1
tx = 1
subchannels = 2
correlation = "identity"

[sim]
snr_db = [10.0, 14.0]
trials = 4000
seed = 3
mode = "outage-fixed-rate"
rate = 1.0

[output]
path = "curve"
format = "csv"
"#,
    )
    .unwrap();
    let out = splitnvd(&["outage", "--config", "run.toml"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    assert!(text.contains("snr_db,trials,errors,estimate,ci_low,ci_high,flag"));
    assert_eq!(text.lines().count(), 4); // comment + header + 2 points
}
