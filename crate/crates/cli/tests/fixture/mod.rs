//! Toy stand-ins for user-supplied files and a runner for the binary.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hybridsent::encoder::{EncoderConfig, EncoderWeights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const POSITIVE: [&str; 6] = ["bagus", "enak", "mantap", "suka", "puas", "ramah"];
pub const NEGATIVE: [&str; 6] = ["buruk", "jelek", "kecewa", "mahal", "lambat", "kotor"];
pub const NEUTRAL: [&str; 6] = ["makanan", "pelayanan", "tempat", "harga", "menu", "kopi"];

/// Vocabulary, encoder weights and raw reviews standing in for user files.
pub fn write_user_inputs(dir: &Path) {
    let mut vocab: Vec<String> = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"].map(String::from).to_vec();
    vocab.extend(POSITIVE.iter().chain(&NEGATIVE).chain(&NEUTRAL).map(|w| w.to_string()));
    fs::write(dir.join("vocab.txt"), vocab.join("\n") + "\n").unwrap();
    let cfg = EncoderConfig::toy(vocab.len());
    fs::write(dir.join("encoder.json"), serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    EncoderWeights::<f32>::random(&cfg, 17)
        .unwrap()
        .to_container(&cfg)
        .unwrap()
        .write(&dir.join("weights.ntc"))
        .unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(1000);
    let mut lines = String::new();
    for i in 0..80 {
        let label = i % 2;
        let words = if label == 1 { &POSITIVE } else { &NEGATIVE };
        let text: Vec<&str> = (0..r.random_range(4..9))
            .map(|k| if k % 2 == 0 { words[r.random_range(0..6)] } else { NEUTRAL[r.random_range(0..6)] })
            .collect();
        let _ = writeln!(lines, "{}", serde_json::json!({"text": text.join(" ").to_uppercase() + "!!", "label": label}));
    }
    fs::write(dir.join("reviews.jsonl"), lines).unwrap();
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybridsent"))
        .args(args)
        .env_remove("HYBRIDSENT_SEED")
        .output()
        .expect("binary runs")
}

/// Stdout on success, a description of the failure otherwise.
pub fn hybridsent(args: &[&str]) -> Result<String, String> {
    let out = run(args);
    if out.status.success() {
        Ok(String::from_utf8_lossy(&out.stdout).into_owned())
    } else {
        Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

