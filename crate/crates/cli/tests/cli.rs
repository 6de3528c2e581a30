use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn imfkit(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imfkit")).args(args).current_dir(cwd).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&imfkit(dir.path(), &["estimate", "--method", "nope", "--src", "a", "--ref", "b", "--out", "o"])), 2);
    assert_eq!(code(&imfkit(dir.path(), &["synthgen", "--channels", "2", "--out", "o"])), 2);
    assert_eq!(code(&imfkit(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn missing_inputs_are_runtime_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = imfkit(dir.path(), &["estimate", "--method", "wha", "--src", "a.png", "--ref", "b.png", "--out", "o"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("a.png"));
}

#[test]
fn malformed_stitch_spec_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.json"), "{\"inputs\": [").unwrap();
    assert_eq!(code(&imfkit(dir.path(), &["stitch", "s.json", "--out", "o"])), 2);
}

#[test]
fn synthgen_estimate_apply_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&imfkit(d, &["synthgen", "--seed", "3", "--size", "48", "--out", "g"])), 0);
    let (a, b) = ("g/pair_000/a.png", "g/pair_000/b.png");
    assert_eq!(code(&imfkit(d, &["estimate", "--method", "wha", "--src", a, "--ref", b, "--out", "t"])), 0);
    for c in 0..3 {
        let csv = fs::read_to_string(d.join(format!("t/channel_{c}.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 257);
    }
    assert_eq!(code(&imfkit(d, &["apply", "--tables", "t", "--input", a, "--out", "m.png"])), 0);
    assert!(d.join("m.png").is_file());
}

#[test]
fn stitch_writes_fused_panorama_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&imfkit(d, &["synthgen", "--kind", "triple", "--size", "48", "--out", "g"])), 0);
    assert_eq!(code(&imfkit(d, &["stitch", "g/triple_000/stitch.json", "--out", "s"])), 0);
    for f in ["fused.png", "pano_0.png", "pano_2.png", "manifest.json", "timings.json"] {
        assert!(d.join("s").join(f).is_file(), "{f}");
    }
    assert_eq!(code(&imfkit(d, &["stitch", "g/triple_000/stitch.json", "--out", "q", "--no-intermediates"])), 0);
    assert_eq!(fs::read_dir(d.join("q")).unwrap().count(), 1);
}
