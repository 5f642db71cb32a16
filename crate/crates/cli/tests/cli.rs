use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use treernn_core::harness::CvReport;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn treernn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treernn")).args(args).env_remove("TREERNN_DATA_DIR").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn gradcheck_passes_for_seed_7() {
    let out = treernn(&["gradcheck", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("max relative error:")).expect("summary line");
    let value: f64 = line.split_whitespace().nth(3).unwrap().parse().unwrap();
    assert!(value < 1e-4, "{line}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = treernn(&["train", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(treernn(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_nonzero_with_a_message() {
    let dir = data_dir();
    let out = treernn(&["train", "--data-dir", dir.to_str().unwrap(), "--dataset", "NOPE", "--epochs", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn training_from_a_cache_matches_one_shot_training() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = data_dir();
    let dir = dir.to_str().unwrap();
    let cache = tmp.path().join("mutag.bin");
    let one = tmp.path().join("one.json");
    let two = tmp.path().join("two.json");
    let common = ["--variant", "mlponly", "--epochs", "2", "--aug", "2", "--seed", "4", "--quiet"];

    let out = treernn(&["prepare", "--data-dir", dir, "--dataset", "MUTAG", "--aug", "2", "--seed", "4", "--out", cache.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("376 images"), "{}", stdout(&out));
    assert!(tmp.path().join("mutag.bin.json").exists());

    let mut a = vec!["train", "--data-dir", dir, "--dataset", "MUTAG", "--out", one.to_str().unwrap()];
    a.extend(common);
    assert!(treernn(&a).status.success());
    let mut b = vec!["train", "--cache", cache.to_str().unwrap(), "--out", two.to_str().unwrap()];
    b.extend(common);
    let out = treernn(&b);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let read = |p: &Path| CvReport::from_json(&std::fs::read_to_string(p).unwrap()).unwrap().without_timing();
    let (r1, r2) = (read(&one), read(&two));
    assert_eq!(r1.to_json(), r2.to_json());
    assert_eq!(r1.folds.len(), 10);
}

#[test]
fn config_file_and_environment_are_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("exp.toml");
    std::fs::write(&cfg, "dataset = \"MUTAG\"\nvariant = \"mlponly\"\nepochs = 1\nfolds = 3\n").unwrap();
    let report = tmp.path().join("r.json");
    let out = Command::new(env!("CARGO_BIN_EXE_treernn"))
        .args(["train", "--config", cfg.to_str().unwrap(), "--seed", "9", "--quiet", "--out", report.to_str().unwrap()])
        .env("TREERNN_DATA_DIR", data_dir())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = CvReport::from_json(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.folds.len(), 3);
    assert_eq!(r.config.seed, 9);
    assert_eq!(r.config.epochs, 1);

    let csv = tmp.path().join("r.csv");
    let out = treernn(&["report", report.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3 + 1, "{text}");
    assert!(lines[0].starts_with("dataset,variant,aug,seed,fold,"), "{}", lines[0]);
    assert!(lines[4].starts_with("MUTAG,mlponly,1,9,mean,"), "{}", lines[4]);
}

#[test]
fn inspect_writes_a_ppm() {
    let tmp = tempfile::tempdir().unwrap();
    let ppm = tmp.path().join("g.ppm");
    let dir = data_dir();
    let out = treernn(&[
        "inspect",
        "--data-dir",
        dir.to_str().unwrap(),
        "--dataset",
        "MUTAG",
        "--graph",
        "3",
        "--copy",
        "2",
        "--out",
        ppm.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = std::fs::read(&ppm).unwrap();
    let header = b"P6\n28 9\n255\n";
    assert!(bytes.starts_with(header));
    assert_eq!(bytes.len(), header.len() + 28 * 9 * 3);
    // 9 rows of the image after the description line
    assert_eq!(stdout(&out).lines().count(), 10);
}
