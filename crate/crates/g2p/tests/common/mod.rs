#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use g2p::g2p_core::lexicon::{SymbolKind, SymbolTable};
use g2p::g2p_core::model::{build_model, Architecture, G2PModel, ModelConfig};
use g2p::g2p_core::nn::RngSeed;

pub const ARCHS: [&str; 3] = ["encdec", "uni", "bi"];

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn small_model(arch: Architecture, seed: u64) -> G2PModel<f32> {
    let config = ModelConfig {
        architecture: arch,
        letter_embedding: 3,
        phoneme_embedding: 2,
        hidden: 4,
        layers: 2,
        window: 3,
        seed: RngSeed(seed),
        init_scale: 0.3,
    };
    let letters = SymbolTable::new(SymbolKind::Letter, ["A", "B", "C", "É"]);
    let phonemes = SymbolTable::new(SymbolKind::Phoneme, ["K", "AE", "T", "K:S"]);
    build_model(config, letters, phonemes).unwrap()
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn g2p<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let Output { status, stdout, stderr } =
        Command::new(env!("CARGO_BIN_EXE_g2p")).args(args).output().expect("spawn g2p");
    Run {
        code: status.code().unwrap_or(-1),
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

/// Runs `g2p` and panics with its stderr unless it exits 0.
pub fn g2p_ok<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Run {
    let run = g2p(args);
    assert_eq!(run.code, 0, "g2p {:?} failed:\n{}", args.iter().map(|a| a.as_ref().to_owned()).collect::<Vec<_>>(), run.stderr);
    run
}

/// Settings that let every architecture memorize the 50-word toy lexicon.
pub const TOY_CONFIG: &str = "\
letter_embedding = 16
phoneme_embedding = 16
hidden = 64
init_scale = 0.1
seed = 7
segments = 150x0.5,50x0.1
minibatch = 5
";

/// Prepares and aligns the toy lexicon under `root`.
pub fn prepare_toy(root: &Path) {
    let data = data_dir();
    fs::write(root.join("toy.conf"), TOY_CONFIG).unwrap();
    let p = |s: &str| root.join(s).into_os_string();
    let d = |s: &str| data.join(s).into_os_string();
    g2p_ok(&[
        "prepare".into(),
        "--lexicon".into(),
        d("toy50.dict"),
        "--train".into(),
        d("toy50.train"),
        "--test".into(),
        d("toy50.test"),
        "--out".into(),
        p("data"),
    ]);
    g2p_ok(&["align".into(), "--data".into(), p("data"), "--out".into(), p("aligned.tsv")]);
}

/// Trains `arch` on the prepared toy data, decodes the training words and
/// scores them. Returns the eval summary line.
pub fn train_decode_eval(root: &Path, arch: &str) -> String {
    let p = |s: &str| root.join(s).into_os_string();
    let run = root.join(format!("run-{arch}"));
    g2p_ok(&[
        "train".into(),
        "--config".into(),
        p("toy.conf"),
        "--arch".into(),
        arch.into(),
        "--data".into(),
        p("data"),
        "--aligned".into(),
        p("aligned.tsv"),
        "--out".into(),
        run.clone().into_os_string(),
    ]);
    let decoded = p(&format!("decoded-{arch}.txt"));
    g2p_ok(&[
        "decode".into(),
        "--model".into(),
        run.join("model.g2pm").into_os_string(),
        "--data".into(),
        p("data"),
        "--partition".into(),
        "train".into(),
        "--out".into(),
        decoded.clone(),
    ]);
    let eval = g2p_ok(&[
        "eval".into(),
        "--hyp".into(),
        decoded,
        "--data".into(),
        p("data"),
        "--partition".into(),
        "train".into(),
        "--out".into(),
        p(&format!("report-{arch}.txt")),
        "--per-word".into(),
        p(&format!("per-word-{arch}.tsv")),
    ]);
    eval.stdout.trim().to_string()
}

/// Every regular file below `dir`, as sorted relative paths.
pub fn files_below(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}
