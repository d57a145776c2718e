mod fixture;

use std::fs;
use std::path::Path;

use fixture::{hybridsent, run, write_user_inputs};
use hybridsent::config::RunConfig;
use tempfile::TempDir;

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

const SMALL_HP: &str = r#"{"num_filters": 8, "region_size": 3, "cnn_l2": 0.001, "kernel_l2": 0.001,
  "recurrent_l2": 0.001, "dense_l2": 0.001, "rnn_units": 8, "embedding_size": 8}"#;

/// User inputs, cleaned reviews and a feature cache of length 16.
fn prepared() -> TempDir {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_user_inputs(d);
    fs::write(d.join("hp.json"), SMALL_HP).unwrap();
    hybridsent(&["preprocess", "--data", &p(d, "reviews.jsonl"), "--out", &p(d, "clean")]).unwrap();
    features(d, "features");
    tmp
}

fn features(d: &Path, out: &str) -> String {
    hybridsent(&[
        "features", "--data", &p(d, "clean/clean.jsonl"), "--vocab", &p(d, "vocab.txt"), "--weights",
        &p(d, "weights.ntc"), "--config", &p(d, "encoder.json"), "--seq-len", "16", "--out", &p(d, out),
    ])
    .unwrap()
}

fn train(d: &Path, input: &[&str], extra: &[&str], out: &str) {
    let hp = p(d, "hp.json");
    let out = p(d, out);
    let mut args = vec!["train"];
    args.extend_from_slice(input);
    args.extend_from_slice(&["--hp", &hp, "--epochs", "2", "--out", &out]);
    args.extend_from_slice(extra);
    hybridsent(&args).unwrap();
}

#[test]
fn preprocess_reports_label_counts() {
    let tmp = prepared();
    let d = tmp.path();
    let summary = fs::read_to_string(d.join("clean/summary.txt")).unwrap();
    assert_eq!(summary, "positive 40, negative 40, total 80\n");
    let first = fs::read_to_string(d.join("clean/clean.jsonl")).unwrap();
    assert!(first.lines().next().unwrap().contains(r#""label":0"#));
    assert!(!first.contains("!!") && !first.contains("BURUK"));
    assert!(d.join("clean/run_config.json").is_file());
}

#[test]
fn malformed_line_is_a_data_error_naming_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("bad.jsonl"), "{\"text\": \"enak\", \"label\": 1}\n{\"text\": \"x\"\n").unwrap();
    let out = run(&["preprocess", "--data", &p(d, "bad.jsonl"), "--out", &p(d, "o")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn empty_input_gives_an_empty_output_and_zero_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("empty.jsonl"), "").unwrap();
    let stdout = hybridsent(&["preprocess", "--data", &p(d, "empty.jsonl"), "--out", &p(d, "o")]).unwrap();
    assert_eq!(stdout, "positive 0, negative 0, total 0\n");
    assert_eq!(fs::read_to_string(d.join("o/clean.jsonl")).unwrap(), "");
}

#[test]
fn missing_label_is_reported_at_its_line() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("x.jsonl"), "{\"text\": \"a\", \"label\": 0}\n{\"text\": \"b\", \"label\": 1}\n{\"text\": \"c\"}\n").unwrap();
    let out = run(&["preprocess", "--data", &p(d, "x.jsonl"), "--out", &p(d, "o")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":3:"));
}

#[test]
fn toy_encoder_defaults_to_128_positions() {
    let tmp = prepared();
    let d = tmp.path();
    let stdout = hybridsent(&[
        "features", "--data", &p(d, "clean/clean.jsonl"), "--vocab", &p(d, "vocab.txt"), "--weights",
        &p(d, "weights.ntc"), "--config", &p(d, "encoder.json"), "--out", &p(d, "full"),
    ])
    .unwrap();
    assert!(stdout.contains("80 examples x 128 positions x 16 features"));
    let cache = hybridsent::encoder::FeatureCache::read(&d.join("full/features.bfc")).unwrap();
    assert_eq!((cache.seq_len, cache.hidden, cache.records.len()), (128, 16, 80));
}

#[test]
fn encoder_weights_must_match_the_config() {
    let tmp = prepared();
    let d = tmp.path();
    let mut cfg: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("encoder.json")).unwrap()).unwrap();
    cfg["num_layers"] = 3.into();
    fs::write(d.join("deeper.json"), cfg.to_string()).unwrap();
    let out = run(&[
        "features", "--data", &p(d, "clean/clean.jsonl"), "--vocab", &p(d, "vocab.txt"), "--weights",
        &p(d, "weights.ntc"), "--config", &p(d, "deeper.json"), "--out", &p(d, "x"),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(run(&["train", "--out", &p(d, "o")]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    fs::write(d.join("f.bfc"), b"BFC1").unwrap();
    let out = run(&["train", "--features", &p(d, "f.bfc"), "--split-ratio", "1.5", "--out", &p(d, "o")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn truncated_cache_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("f.bfc"), b"BFC1\x01").unwrap();
    let out = run(&["train", "--features", &p(d, "f.bfc"), "--out", &p(d, "o")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn feature_extraction_is_byte_deterministic() {
    let tmp = prepared();
    let d = tmp.path();
    let stdout = features(d, "again");
    assert!(stdout.contains("80 examples x 16 positions x 16 features"));
    let a = fs::read(d.join("features/features.bfc")).unwrap();
    assert_eq!(a, fs::read(d.join("again/features.bfc")).unwrap());
    let seq = run(&[
        "features", "--sequential", "--data", &p(d, "clean/clean.jsonl"), "--vocab", &p(d, "vocab.txt"),
        "--weights", &p(d, "weights.ntc"), "--config", &p(d, "encoder.json"), "--seq-len", "16", "--out",
        &p(d, "seq"),
    ]);
    assert!(seq.status.success());
    assert_eq!(a, fs::read(d.join("seq/features.bfc")).unwrap());
}

#[test]
fn training_writes_checkpoints_histories_and_snapshot() {
    let tmp = prepared();
    let d = tmp.path();
    let input = ["--features", &p(d, "features/features.bfc")];
    train(d, &input, &["--arch", "CNN-GRU", "--reps", "3"], "a");
    train(d, &input, &["--arch", "cnn-gru", "--reps", "3", "--sequential"], "b");
    for i in 0..3 {
        for f in [format!("rep{i}.ntc"), format!("rep{i}.json"), format!("history{i}.csv")] {
            let a = fs::read(d.join("a/cnn-gru").join(&f)).unwrap();
            assert_eq!(a, fs::read(d.join("b/cnn-gru").join(&f)).unwrap(), "{f}");
        }
    }
    assert!(d.join("a/test.bfc").is_file() && d.join("a/cnn-gru/metrics.json").is_file());
    let cfg = RunConfig::from_json_file(&d.join("a/run_config.json")).unwrap();
    assert_eq!((cfg.train.epochs, cfg.train.repetitions, cfg.hyperparams.num_filters), (2, 3, 8));
}

#[test]
fn seed_comes_from_the_environment_unless_given() {
    let tmp = prepared();
    let d = tmp.path();
    let base = [
        "train", "--features", &p(d, "features/features.bfc"), "--arch", "CNN", "--reps", "1", "--epochs", "1",
    ];
    let with_env = |extra: &[&str], out: &str| {
        let mut args = base.to_vec();
        let out = p(d, out);
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", &out]);
        let result = std::process::Command::new(env!("CARGO_BIN_EXE_hybridsent"))
            .args(&args)
            .env("HYBRIDSENT_SEED", "777")
            .output()
            .unwrap();
        assert!(result.status.success());
        RunConfig::from_json_file(&d.join(&out).join("run_config.json")).unwrap().train.seed
    };
    assert_eq!(with_env(&[], "env"), 777);
    assert_eq!(with_env(&["--seed", "5"], "flag"), 5);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = prepared();
    let d = tmp.path();
    let mut cfg = RunConfig::default();
    cfg.train.repetitions = 1;
    cfg.train.epochs = 7;
    cfg.split_seed = 3;
    fs::write(d.join("run.json"), cfg.to_json().unwrap()).unwrap();
    train(d, &["--features", &p(d, "features/features.bfc"), "--config", &p(d, "run.json")], &["--arch", "CNN"], "o");
    let got = RunConfig::from_json_file(&d.join("o/run_config.json")).unwrap();
    assert_eq!((got.train.repetitions, got.train.epochs, got.split_seed), (1, 2, 3));
}

#[test]
fn single_repetition_reports_zero_spread() {
    let tmp = prepared();
    let d = tmp.path();
    train(d, &["--features", &p(d, "features/features.bfc")], &["--arch", "LSTM", "--reps", "1"], "o");
    let report = hybridsent(&["eval", "--checkpoints", &p(d, "o"), "--test", &p(d, "o/test.bfc"), "--out", &p(d, "r")])
        .unwrap();
    let row = report.lines().find(|l| l.contains("LSTM") && l.contains('±')).unwrap();
    assert_eq!(row.matches("± 0.0000").count(), 3, "{row}");
    assert_eq!(report.lines().filter(|l| l.contains('—')).count(), 6);
}

#[test]
fn fourteen_runs_give_a_fourteen_row_table() {
    let tmp = prepared();
    let d = tmp.path();
    train(d, &["--features", &p(d, "features/features.bfc")], &["--reps", "1"], "bert");
    train(
        d,
        &["--data", &p(d, "clean/clean.jsonl"), "--vocab", &p(d, "vocab.txt"), "--seq-len", "16"],
        &["--reps", "1"],
        "emb",
    );
    let (bert, emb) = (p(d, "bert"), p(d, "emb"));
    let (bert_test, emb_test) = (p(d, "bert/test.bfc"), p(d, "emb/test.tokens.json"));
    let eval = |out: &str, extra: &[&str]| {
        let out = p(d, out);
        let mut a = vec!["eval", "--checkpoints", &bert, &emb, "--test", &bert_test, &emb_test, "--out", &out];
        a.extend_from_slice(extra);
        hybridsent(&a).unwrap()
    };
    let report = eval("r1", &[]);
    let rows: Vec<&str> = report.lines().filter(|l| l.contains('±')).collect();
    assert_eq!(rows.len(), 14);
    let bert = report.find("\nBERT\n").unwrap();
    let emb = report.find("\nEmbedding\n").unwrap();
    assert!(bert < emb);
    let order: Vec<&str> = rows.iter().map(|r| r.split('|').nth(1).unwrap().trim()).collect();
    let want = ["CNN-LSTM", "LSTM-CNN", "CNN-GRU", "GRU-CNN", "CNN", "LSTM", "GRU"];
    assert_eq!(order, [want, want].concat());
    let runs = fs::read_to_string(d.join("r1/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 15);

    eval("r2", &[]);
    for f in ["report.txt", "report.csv"] {
        assert_eq!(fs::read(d.join("r1").join(f)).unwrap(), fs::read(d.join("r2").join(f)).unwrap());
    }
    let comma = eval("r3", &["--decimal-comma"]);
    assert!(comma.lines().filter(|l| l.contains('±')).all(|l| !l.contains('.') && l.contains(',')));
}

#[test]
fn search_writes_a_resumable_ledger() {
    let tmp = prepared();
    let d = tmp.path();
    let space = r#"{"dims": [{"name": "num_filters", "values": [4, 8]}, {"name": "rnn_units", "values": [4, 8]}],
      "base": {"num_filters": 8, "region_size": 3, "cnn_l2": 0.001, "kernel_l2": 0.001, "recurrent_l2": 0.001,
               "dense_l2": 0.001, "rnn_units": 8}}"#;
    fs::write(d.join("space.json"), space).unwrap();
    let args = |trials: &str| {
        hybridsent(&[
            "hpo", "--features", &p(d, "features/features.bfc"), "--arch", "GRU", "--space", &p(d, "space.json"),
            "--max-trials", trials, "--epochs", "2", "--out", &p(d, "hpo"),
        ])
        .unwrap()
    };
    args("2");
    let partial = fs::read_to_string(d.join("hpo/trials.jsonl")).unwrap();
    assert_eq!(partial.lines().count(), 2);
    args("3");
    let full = fs::read_to_string(d.join("hpo/trials.jsonl")).unwrap();
    assert_eq!(full.lines().count(), 3);
    assert!(full.starts_with(&partial));
    let best: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("hpo/best_hp.json")).unwrap()).unwrap();
    assert!([4, 8].contains(&best["num_filters"].as_u64().unwrap()));
    assert!(d.join("hpo/run_config.json").is_file());
}

#[test]
fn tsne_plots_both_representations() {
    let tmp = prepared();
    let d = tmp.path();
    train(
        d,
        &["--data", &p(d, "clean/clean.jsonl"), "--vocab", &p(d, "vocab.txt"), "--seq-len", "16"],
        &["--arch", "CNN", "--reps", "1"],
        "emb",
    );
    let args = [
        "tsne", "--features", &p(d, "features/features.bfc"), "--checkpoint", &p(d, "emb/cnn/rep0.ntc"),
        "--tokens", &p(d, "emb/test.tokens.json"), "--perplexity", "5", "--iterations", "300",
    ];
    let run_to = |out: &str| {
        let mut a = args.to_vec();
        let out = p(d, out);
        a.extend_from_slice(&["--out", &out]);
        hybridsent(&a).unwrap();
    };
    run_to("t1");
    run_to("t2");
    let bert = fs::read_to_string(d.join("t1/tsne_bert.svg")).unwrap();
    let emb = fs::read_to_string(d.join("t1/tsne_embedding.svg")).unwrap();
    assert_eq!(bert.matches("<circle").count(), 80);
    assert_eq!(emb.matches("<circle").count(), 16);
    assert_eq!(bert, fs::read_to_string(d.join("t2/tsne_bert.svg")).unwrap());
    assert!(d.join("t1/tsne_embedding.csv").is_file() && d.join("t1/run_config.json").is_file());
}

#[test]
fn divergence_exits_with_four() {
    let tmp = prepared();
    let d = tmp.path();
    let out = run(&[
        "train", "--features", &p(d, "features/features.bfc"), "--arch", "CNN", "--reps", "1", "--lr", "1e30",
        "--hp", &p(d, "hp.json"), "--out", &p(d, "o"),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
