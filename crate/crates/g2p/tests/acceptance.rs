mod common;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::{files_below, g2p, prepare_toy, train_decode_eval, ARCHS};

struct Outcome {
    pass: Option<bool>,
    detail: String,
}

fn report(n: usize, name: &str, started: Instant, outcome: Outcome) -> bool {
    let verdict = match outcome.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "SKIPPED",
    };
    println!("criterion {n} {name}: {verdict} ({}; {:.1}s)", outcome.detail, started.elapsed().as_secs_f64());
    outcome.pass != Some(false)
}

fn full_pipeline(root: &Path) -> Vec<String> {
    prepare_toy(root);
    ARCHS.iter().map(|a| train_decode_eval(root, a)).collect()
}

fn overfit(root: &Path) -> Outcome {
    let summaries = full_pipeline(root);
    let pass = summaries.iter().all(|s| s == "PER 0.00% WER 0.00%");
    let detail = ARCHS.iter().zip(&summaries).map(|(a, s)| format!("{a}: {s}")).collect::<Vec<_>>().join(", ");
    Outcome { pass: Some(pass), detail }
}

fn determinism(first: &Path, second: &Path) -> Outcome {
    full_pipeline(second);
    let (a, b) = (files_below(first), files_below(second));
    if a != b {
        return Outcome { pass: Some(false), detail: "runs produced different file sets".into() };
    }
    let differing: Vec<String> = a
        .iter()
        .filter(|f| fs::read(first.join(f)).unwrap() != fs::read(second.join(f)).unwrap())
        .map(|f| f.display().to_string())
        .collect();
    let checkpoints = a.iter().filter(|f| f.extension().is_some_and(|e| e == "g2pm")).count();
    Outcome {
        pass: Some(differing.is_empty()),
        detail: if differing.is_empty() {
            format!("{} files identical, {checkpoints} of them model files", a.len())
        } else {
            format!("differing: {}", differing.join(" "))
        },
    }
}

/// Runs a full-scale recipe from a directory holding `lexicon`, `train.list`,
/// `test.list` and optionally `validation.list`.
fn full_scale(var: &str, format: &str, settings: &[&str], max_wer: f64, max_per: f64) -> Outcome {
    let Some(dir) = std::env::var_os(var).map(PathBuf::from) else {
        return Outcome { pass: None, detail: format!("set {var} to run") };
    };
    let work = tempfile::tempdir().unwrap();
    let p = |s: &str| work.path().join(s).into_os_string();
    let d = |s: &str| dir.join(s).into_os_string();
    let mut sets: Vec<OsString> = settings.iter().flat_map(|s| ["--set".into(), (*s).into()]).collect();
    sets.extend(["--set".into(), format!("format={format}").into()]);
    let mut prepare: Vec<OsString> =
        vec!["prepare".into(), "--lexicon".into(), d("lexicon"), "--train".into(), d("train.list")];
    if dir.join("validation.list").exists() {
        prepare.extend(["--validation".into(), d("validation.list")]);
    }
    prepare.extend(["--test".into(), d("test.list"), "--out".into(), p("data")]);
    let steps: Vec<Vec<OsString>> = vec![
        prepare,
        vec!["align".into(), "--data".into(), p("data"), "--out".into(), p("aligned.tsv")],
        vec!["train".into(), "--data".into(), p("data"), "--aligned".into(), p("aligned.tsv"), "--out".into(), p("run")],
        vec!["decode".into(), "--model".into(), p("run/model.g2pm"), "--data".into(), p("data"), "--out".into(), p("decoded.txt"), "--workers".into(), "8".into()],
        vec!["eval".into(), "--hyp".into(), p("decoded.txt"), "--data".into(), p("data")],
    ];
    let mut last = String::new();
    for step in steps {
        let args: Vec<OsString> = step.into_iter().chain(sets.iter().cloned()).collect();
        let run = g2p(&args);
        if run.code != 0 {
            return Outcome { pass: Some(false), detail: format!("{:?} exited {}", args[0], run.code) };
        }
        last = run.stdout;
    }
    let nums: Vec<f64> =
        last.split_whitespace().filter_map(|t| t.strip_suffix('%')).filter_map(|t| t.parse().ok()).collect();
    let [per, wer] = nums[..] else {
        return Outcome { pass: Some(false), detail: format!("unexpected eval output {last:?}") };
    };
    Outcome {
        pass: Some(wer <= max_wer && per <= max_per),
        detail: format!("test WER {wer:.2}% PER {per:.2}%, bounds {max_wer}/{max_per}"),
    }
}

fn main() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut ok = true;

    let t = Instant::now();
    ok &= report(6, "end-to-end overfit", t, overfit(first.path()));
    let t = Instant::now();
    ok &= report(7, "determinism", t, determinism(first.path(), second.path()));
    let t = Instant::now();
    let nettalk = full_scale(
        "G2P_NETTALK_DIR",
        "tabular",
        &["architecture=bi", "layers=1", "schedule=piecewise", "segments=10x0.1,2x0.05,70x0.01"],
        34.0,
        8.5,
    );
    ok &= report(8, "NetTalk accuracy", t, nettalk);
    let t = Instant::now();
    let cmudict =
        full_scale("G2P_CMUDICT_DIR", "cmudict", &["architecture=bi", "layers=3", "schedule=validation"], 26.0, 6.2);
    ok &= report(9, "CMUDict accuracy", t, cmudict);

    if !ok {
        std::process::exit(1);
    }
}
