//! End-to-end tests of the `mixfm` binary: every subcommand, the
//! promised artifacts, determinism, config-file precedence, and the
//! exit-code contract.

use std::path::Path;
use std::process::{Command, Output};

fn mixfm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixfm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary spawns")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = mixfm(dir, args);
    assert!(
        out.status.success(),
        "`mixfm {}` failed:\nstdout: {}\nstderr: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    mixfm(dir, args).status.code().expect("exit code")
}

fn read(dir: &Path, rel: &str) -> String {
    std::fs::read_to_string(dir.join(rel)).unwrap_or_else(|e| panic!("read {rel}: {e}"))
}

/// Tiny synthetic splits most tests train on.
fn make_data(dir: &Path) {
    ok(
        dir,
        &[
            "synth", "--out", "data", "--n", "300", "--fields", "4", "--field-size", "8",
            "--blocked", "2", "--seed", "11",
        ],
    );
}

fn strip_seconds(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 5, "curves row `{line}`");
            fields[..4].join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn synth_writes_splits_and_truth_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    for rel in ["data/train.txt", "data/valid.txt", "data/test.txt", "data/truth.json"] {
        assert!(tmp.path().join(rel).exists(), "missing {rel}");
    }
    let first = read(tmp.path(), "data/train.txt");
    assert!(first.starts_with("#dim 32"), "declared width: {}", &first[..20]);
    let truth: serde_json::Value = serde_json::from_str(&read(tmp.path(), "data/truth.json")).unwrap();
    assert_eq!(truth["blocked_pairs"].as_array().unwrap().len(), 2);

    ok(
        tmp.path(),
        &[
            "synth", "--out", "data2", "--n", "300", "--fields", "4", "--field-size", "8",
            "--blocked", "2", "--seed", "11",
        ],
    );
    assert_eq!(first, read(tmp.path(), "data2/train.txt"), "same seed, same bytes");
    let other = ok(
        tmp.path(),
        &[
            "synth", "--out", "data3", "--n", "300", "--fields", "4", "--field-size", "8",
            "--blocked", "2", "--seed", "12",
        ],
    );
    assert!(!other.is_empty());
    assert_ne!(first, read(tmp.path(), "data3/train.txt"), "seed changes the data");
}

#[test]
fn train_writes_curves_and_checkpoint() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    ok(
        tmp.path(),
        &[
            "train", "--train", "data/train.txt", "--valid", "data/valid.txt", "--test",
            "data/test.txt", "--out", "run", "--mode", "mix", "--epochs", "4", "--seed", "3",
        ],
    );
    let curves = read(tmp.path(), "run/curves.csv");
    let lines: Vec<&str> = curves.lines().collect();
    assert_eq!(lines[0], "epoch,split,auc,logloss,seconds");
    // 4 epochs x 3 splits.
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[1].starts_with("1,train,"));
    assert!(lines[2].starts_with("1,valid,"));
    assert!(lines[3].starts_with("1,test,"));
    assert!(tmp.path().join("run/model.ckpt").exists());
}

#[test]
fn train_reruns_are_identical_except_wall_clock() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    let args = [
        "train", "--train", "data/train.txt", "--test", "data/test.txt", "--out", "a", "--mode",
        "saliency", "--p", "3", "--epochs", "3", "--seed", "9",
    ];
    ok(tmp.path(), &args);
    let mut args_b = args;
    args_b[6] = "b";
    ok(tmp.path(), &args_b);
    let a = read(tmp.path(), "a/curves.csv");
    let b = read(tmp.path(), "b/curves.csv");
    assert_eq!(strip_seconds(&a), strip_seconds(&b));
    assert_eq!(
        std::fs::read(tmp.path().join("a/model.ckpt")).unwrap(),
        std::fs::read(tmp.path().join("b/model.ckpt")).unwrap()
    );
}

#[test]
fn evaluate_reports_metrics_as_json() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    ok(
        tmp.path(),
        &["train", "--train", "data/train.txt", "--out", "run", "--epochs", "2", "--seed", "3"],
    );
    let out = ok(
        tmp.path(),
        &["evaluate", "--model", "run/model.ckpt", "--data", "data/test.txt"],
    );
    let report: serde_json::Value = serde_json::from_str(&out).expect("json report");
    let auc = report["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
    assert!(report["logloss"].as_f64().unwrap() > 0.0);
    assert_eq!(report["n_examples"].as_u64().unwrap(), 60);
}

#[test]
fn augment_materializes_the_requested_batch() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    ok(
        tmp.path(),
        &[
            "augment", "--train", "data/train.txt", "--output", "aug.txt", "--mode", "mix",
            "--ratio", "0.5", "--seed", "3",
        ],
    );
    let text = read(tmp.path(), "aug.txt");
    assert!(text.contains("#mixed"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    // 210 train examples at ratio 0.5.
    assert_eq!(rows, 105);
    let labels: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
        .collect();
    assert!(labels.iter().all(|y| (0.0..=1.0).contains(y)));
}

#[test]
fn bound_emits_reports_and_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    ok(
        tmp.path(),
        &["train", "--train", "data/train.txt", "--out", "run", "--epochs", "2", "--seed", "3"],
    );
    let out = ok(
        tmp.path(),
        &[
            "bound", "--model", "run/model.ckpt", "--train", "data/train.txt", "--out", "run",
            "--delta", "0.1",
        ],
    );
    let doc: serde_json::Value = serde_json::from_str(&out).expect("json document");
    assert_eq!(doc["fm"]["delta"].as_f64().unwrap(), 0.1);
    assert!(doc["fm"]["total_gap"].as_f64().unwrap() > 0.0);
    assert!(doc["mixfm"]["total_gap"].as_f64().unwrap() > 0.0);
    let verdict = doc["verdict"].as_str().unwrap();
    assert!(verdict == "mixfm-tighter" || verdict == "fm-tighter");
    assert_eq!(read(tmp.path(), "run/bound.json"), out);
}

#[test]
fn ratio_sweep_rows_are_sorted_with_exact_zero_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    ok(
        tmp.path(),
        &[
            "sweep-ratio", "--train", "data/train.txt", "--test", "data/test.txt", "--out", "sw",
            "--ratios", "1,0,0.5", "--repeats", "2", "--epochs", "2", "--seed", "5",
        ],
    );
    let csv = read(tmp.path(), "sw/sweep.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,method,mean_auc,sd_auc,delta");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,fm,"));
    assert!(lines[2].starts_with("0.5,mixfm,"));
    assert!(lines[3].starts_with("1,mixfm,"));
    assert!(lines[1].ends_with(",0"), "baseline delta must be exactly 0: {}", lines[1]);
}

#[test]
fn neighbor_sweep_baseline_is_single_candidate() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    let out = ok(
        tmp.path(),
        &[
            "sweep-neighbors", "--train", "data/train.txt", "--test", "data/test.txt",
            "--p-grid", "3,1", "--repeats", "2", "--epochs", "2", "--seed", "5",
        ],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,method,mean_auc,sd_auc,delta");
    assert!(lines[1].starts_with("1,smfm,"));
    assert!(lines[1].ends_with(",0"));
    assert!(lines[2].starts_with("3,smfm,"));
}

#[test]
fn embedding_sweep_tracks_capacity_per_method() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    let out = ok(
        tmp.path(),
        &[
            "sweep-embedding", "--train", "data/train.txt", "--test", "data/test.txt",
            "--d-grid", "2,4", "--methods", "fm,mixfm", "--repeats", "2", "--epochs", "2",
            "--seed", "5",
        ],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,method,mean_auc,sd_auc,delta,mean_gamma");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("2,fm,"));
    assert!(lines[2].starts_with("4,fm,"));
    assert!(lines[3].starts_with("2,mixfm,"));
    assert!(lines[4].starts_with("4,mixfm,"));
    for row in &lines[1..] {
        let gamma: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(gamma > 0.0, "capacity column: {row}");
    }
}

#[test]
fn perturb_reports_zero_drop_without_noise() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    let out = ok(
        tmp.path(),
        &[
            "perturb", "--train", "data/train.txt", "--test", "data/test.txt", "--noise-grid",
            "0,0.2", "--methods", "fm", "--repeats", "2", "--epochs", "2", "--seed", "5",
        ],
    );
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "x,method,mean_auc,sd_auc,delta");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,fm,"));
    assert!(lines[1].ends_with(",0"), "clean row drop must be exactly 0: {}", lines[1]);
    assert!(lines[2].starts_with("0.2,fm,"));
}

#[test]
fn encode_builds_sparse_features_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(
        tmp.path().join("clicks.csv"),
        "user,ad,hour,label\nu1,a1,3,1\nu2,a1,4,0\nu1,a2,3,1\n",
    )
    .unwrap();
    ok(
        tmp.path(),
        &[
            "encode", "--input", "clicks.csv", "--output", "clicks.txt", "--schema-out",
            "schema.json",
        ],
    );
    let text = read(tmp.path(), "clicks.txt");
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("#dim "));
    assert_eq!(lines.len(), 4);
    for row in &lines[1..] {
        let y: f64 = row.split_whitespace().next().unwrap().parse().unwrap();
        assert!(y == 0.0 || y == 1.0);
    }
    let schema: serde_json::Value = serde_json::from_str(&read(tmp.path(), "schema.json")).unwrap();
    assert!(schema["columns"].is_array() || schema["fields"].is_array() || schema.is_object());

    // Re-encoding with the saved schema maps unseen categories to the
    // out-of-vocabulary bucket instead of growing the space.
    std::fs::write(tmp.path().join("new.csv"), "user,ad,hour,label\nu9,a1,3,0\n").unwrap();
    ok(
        tmp.path(),
        &[
            "encode", "--input", "new.csv", "--output", "new.txt", "--schema", "schema.json",
            "--oov-bucket",
        ],
    );
    assert!(read(tmp.path(), "new.txt").starts_with("#dim "));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    std::fs::write(
        tmp.path().join("exp.conf"),
        "train = data/train.txt\ntest = data/test.txt\nepochs = 2\nseed = 5\nmode = mix\nout = from_file\n",
    )
    .unwrap();
    ok(tmp.path(), &["--config", "exp.conf", "train"]);
    assert!(tmp.path().join("from_file/curves.csv").exists());

    // The flag wins over the file.
    ok(tmp.path(), &["--config", "exp.conf", "train", "--out", "from_flag"]);
    assert!(tmp.path().join("from_flag/curves.csv").exists());
    assert_eq!(
        strip_seconds(&read(tmp.path(), "from_file/curves.csv")),
        strip_seconds(&read(tmp.path(), "from_flag/curves.csv")),
        "same settings either way"
    );

    let bad = tmp.path().join("bad.conf");
    std::fs::write(&bad, "learning_rate = 0.1\n").unwrap();
    assert_eq!(code(tmp.path(), &["--config", "bad.conf", "train"]), 1);
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();
    make_data(tmp.path());
    assert_eq!(code(tmp.path(), &["--help"]), 0);
    assert_eq!(code(tmp.path(), &["--version"]), 0);
    // Usage errors.
    assert_eq!(code(tmp.path(), &["no-such-command"]), 1);
    assert_eq!(code(tmp.path(), &["train", "--epochs", "three"]), 1);
    // Validation errors.
    assert_eq!(
        code(tmp.path(), &["train", "--train", "data/train.txt", "--out", "r", "--epochs", "0"]),
        1
    );
    assert_eq!(
        code(
            tmp.path(),
            &["sweep-ratio", "--train", "data/train.txt", "--test", "data/test.txt", "--ratios", ""],
        ),
        1
    );
    // I/O errors.
    assert_eq!(
        code(tmp.path(), &["evaluate", "--model", "absent.ckpt", "--data", "data/test.txt"]),
        2
    );
    assert_eq!(
        code(tmp.path(), &["train", "--train", "absent.txt", "--out", "r"]),
        2
    );
}

#[test]
fn malformed_sparse_input_is_a_validation_failure() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("bad.txt"), "#dim 4\n1 0:1 junk\n").unwrap();
    std::fs::write(tmp.path().join("bad_label.txt"), "#dim 4\n7 0:1\n").unwrap();
    for f in ["bad.txt", "bad_label.txt"] {
        assert_eq!(
            code(tmp.path(), &["train", "--train", f, "--out", "r"]),
            1,
            "file {f}"
        );
    }
}
