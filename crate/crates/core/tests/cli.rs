use std::path::Path;
use std::process::{Command, Output};

fn augtag(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_augtag"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Two-column fixtures: word, then label.
fn two_col<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(["--label-col", "1"]);
    v
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("`{key}` missing from:\n{text}"))
        .to_string()
}

/// Gold with three chunks; the prediction drops the location.
const GOLD: &str = "\
John B-PER
Smith I-PER
visited O
Paris B-LOC

Acme B-ORG
hired O
staff O
";

fn prediction_file(labels: &[&str]) -> String {
    let all = ["O", "B-PER", "I-PER", "B-LOC", "B-ORG"];
    let words = [["John", "Smith", "visited", "Paris"].as_slice(), ["Acme", "hired", "staff"].as_slice()];
    let mut out = format!("#labels\t{}\n", all.join("\t"));
    let mut k = 0;
    for (s, sentence) in words.iter().enumerate() {
        for (i, w) in sentence.iter().enumerate() {
            let label = labels[k];
            k += 1;
            let probs: Vec<String> = all.iter().map(|l| if *l == label { "1" } else { "0" }.to_string()).collect();
            out.push_str(&format!("{s}\t{i}\t{w}\t-\t{label}\t-\t{}\n", probs.join("\t")));
        }
    }
    out
}

#[test]
fn eval_scores_two_of_three_chunks() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("gold.txt"), GOLD).unwrap();
    std::fs::write(
        dir.path().join("pred.tsv"),
        prediction_file(&["B-PER", "I-PER", "O", "O", "B-ORG", "O", "O"]),
    )
    .unwrap();
    let args = two_col(&[
        "eval", "--train", "gold.txt", "--gold", "gold.txt", "--predictions", "pred.tsv", "--kv", "kv.txt",
    ]);
    let o = augtag(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let f1: f64 = value(&stdout(&o), "f1").parse().unwrap();
    // P = 2/2, R = 2/3
    assert!((f1 - 0.8).abs() < 1e-12);
    let kv = std::fs::read_to_string(dir.path().join("kv.txt")).unwrap();
    assert_eq!(value(&kv, "gold_chunks"), "3");
    assert_eq!(value(&kv, "predicted_chunks"), "2");
    assert_eq!(value(&kv, "correct_chunks"), "2");
    assert_eq!(value(&kv, "precision"), "1");
    assert!(stdout(&o).contains("Chunk-level evaluation"));

    std::fs::write(
        dir.path().join("pred.tsv"),
        prediction_file(&["B-PER", "I-PER", "O", "B-LOC", "B-ORG", "O", "O"]),
    )
    .unwrap();
    let o = augtag(dir.path(), &args);
    assert_eq!(value(&stdout(&o), "f1"), "1");
}

#[test]
fn eval_names_the_first_misaligned_token() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("gold.txt"), GOLD.replace("staff", "people")).unwrap();
    std::fs::write(
        dir.path().join("pred.tsv"),
        prediction_file(&["B-PER", "I-PER", "O", "B-LOC", "B-ORG", "O", "O"]),
    )
    .unwrap();
    let o = augtag(
        dir.path(),
        &two_col(&["eval", "--train", "gold.txt", "--gold", "gold.txt", "--predictions", "pred.tsv"]),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sentence 1 token 2"), "{}", stderr(&o));
}

#[test]
fn stats_matches_hand_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::new();
    for i in 0..96 {
        text.push_str(&format!("w{i} O\n"));
        if i % 12 == 11 {
            text.push('\n');
        }
    }
    text.push_str("Ann B-PER\nLee I-PER\n\nBo B-PER\n\nCy B-PER\n");
    std::fs::write(dir.path().join("c.txt"), text).unwrap();
    let o = augtag(
        dir.path(),
        &two_col(&["stats", "--corpus", "c.txt", "--minority-threshold", "0.05"]),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(value(&out, "total_tokens"), "100");
    assert_eq!(value(&out, "minority_tag_types"), "2");
    assert_eq!(value(&out, "minority_tokens"), "4");
    assert_eq!(value(&out, "majority_tag_types"), "1");
    assert_eq!(value(&out, "majority_tokens"), "96");
    assert_eq!(value(&out, "majority_labels"), "O");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = augtag(dir.path(), &["stats", "--corpus", "nope.txt"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).starts_with("error:"));

    std::fs::write(dir.path().join("gold.txt"), GOLD).unwrap();
    let invalid = augtag(dir.path(), &two_col(&["stats", "--corpus", "gold.txt", "--gamma", "1.5"]));
    assert_eq!(invalid.status.code(), Some(1));
    assert!(stderr(&invalid).contains("gamma"), "{}", stderr(&invalid));

    let wrong_columns = augtag(dir.path(), &["stats", "--corpus", "gold.txt"]);
    assert_eq!(wrong_columns.status.code(), Some(1));
    assert!(stderr(&wrong_columns).contains("line 1"));

    assert_eq!(augtag(dir.path(), &["frobnicate"]).status.code(), Some(1));
    let help = augtag(dir.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("train-dat"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("gold.txt"), GOLD).unwrap();
    std::fs::write(dir.path().join("run.toml"), "train = \"gold.txt\"\nlabel_col = 1\nminority_threshold = 0.2\n").unwrap();
    let o = augtag(dir.path(), &["stats", "--config", "run.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "minority_threshold"), "0.2");
    let o = augtag(dir.path(), &["stats", "--config", "run.toml", "--minority-threshold", "0.4"]);
    assert_eq!(value(&stdout(&o), "minority_threshold"), "0.4");
    assert_eq!(value(&stdout(&o), "majority_labels"), "O");

    std::fs::write(dir.path().join("bad.toml"), "label_col = 1\ngamma = 2.0\n").unwrap();
    let o = augtag(dir.path(), &["stats", "--config", "bad.toml", "--corpus", "gold.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

/// Synthetic data through every stage, including a DAT trained on
/// distributions read from a prediction file instead of the archive.
#[test]
fn full_pipeline_with_external_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let o = augtag(d, args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        o
    };
    run(&["synth", "--train-out", "train.txt", "--test-out", "test.txt", "--tokens", "1500", "--test-tokens", "400"]);
    let common = [
        "--train", "train.txt", "--test", "test.txt", "--embedding-dim", "16", "--base-ngram", "1",
        "--base-hidden", "8", "--label-col", "1", "--base-epochs", "3", "--minority-threshold", "0.02",
    ];
    let mut args = vec!["train-base", "--output", "base.bin", "--log", "base.tsv"];
    args.extend(common);
    run(&args);

    let base_only = run(&["infer", "--archive", "base.bin", "--output", "base_pred.tsv"]);
    assert_eq!(value(&stdout(&base_only), "base_only"), "true");
    assert!(stderr(&base_only).contains("warning"));

    // Base distributions over the training corpus, as an external tagger would supply them.
    run(&["infer", "--archive", "base.bin", "--test", "train.txt", "--output", "train_pred.tsv"]);
    let dat_args = [
        "--dat-epochs", "300", "--dat-hidden", "32,32", "--log", "dat.tsv", "--output",
    ];
    let mut a = vec!["train-dat", "--archive", "base.bin", "--predictions", "train_pred.tsv"];
    a.extend(dat_args);
    a.push("ext.bin");
    let trained = run(&a);
    assert_eq!(value(&stdout(&trained), "episodes"), "300");
    let mut b = vec!["train-dat", "--archive", "base.bin"];
    b.extend(dat_args);
    b.push("own.bin");
    run(&b);
    // Same distributions, so the two archives agree byte for byte.
    assert_eq!(
        std::fs::read(d.join("ext.bin")).unwrap(),
        std::fs::read(d.join("own.bin")).unwrap()
    );
    let dat_log = std::fs::read_to_string(d.join("dat.tsv")).unwrap();
    assert_eq!(dat_log.lines().count(), 301);

    let inferred = run(&["infer", "--archive", "ext.bin", "--output", "pred.tsv", "--stats", "filter.txt"]);
    assert_eq!(value(&stdout(&inferred), "base_only"), "false");
    assert_eq!(std::fs::read_to_string(d.join("filter.txt")).unwrap(), stdout(&inferred));
    let zero = run(&["infer", "--archive", "ext.bin", "--output", "zero.tsv", "--threshold", "0"]);
    assert_eq!(value(&stdout(&zero), "filtered"), "0");
    // At threshold zero nothing is relabelled, so the file equals the base-only run.
    assert_eq!(
        std::fs::read(d.join("zero.tsv")).unwrap(),
        std::fs::read(d.join("base_pred.tsv")).unwrap()
    );
    let four = run(&["infer", "--archive", "ext.bin", "--output", "pred4.tsv", "--workers", "4"]);
    assert_eq!(stdout(&four), stdout(&inferred));
    assert_eq!(std::fs::read(d.join("pred4.tsv")).unwrap(), std::fs::read(d.join("pred.tsv")).unwrap());

    let eval = run(&["eval", "--archive", "ext.bin", "--gold", "test.txt", "--predictions", "pred.tsv", "--report", "report.txt"]);
    let f1: f64 = value(&stdout(&eval), "f1").parse().unwrap();
    assert!((0.0..=1.0).contains(&f1));
    assert!(std::fs::read_to_string(d.join("report.txt")).unwrap().contains("Chunk-level evaluation"));
}
