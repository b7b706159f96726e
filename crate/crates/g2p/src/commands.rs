//! The pipeline stages behind each subcommand.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::thread;

use g2p_core::aligner::{align_corpus, em_train_aligner, AlignedPair, AlignError};
use g2p_core::lexicon::{build_symbol_tables, load_split, parse_lexicon, LexiconEntry, Partition};
use g2p_core::metrics::{evaluate, EvalReport, MetricsError};
use g2p_core::model::{build_model, train, CheckpointSink, EncodedExample, EpochRecord, G2PModel, TrainError};
use thiserror::Error;

use crate::batch::decode_batch;
use crate::config::{ConfigError, RunConfig};
use crate::dataset::{read_text, write_text, Dataset, DatasetError};
use crate::formats::{
    history_line, per_word_tsv, read_aligned, read_best_hypotheses, summary_line, write_aligned, write_decoded,
    HISTORY_HEADER,
};
use crate::model_file::{encode_model, load_model, ModelFileError};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    ModelFile { path: PathBuf, source: ModelFileError },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Divergence(TrainError),
    #[error("{failed} of {total} words failed to decode")]
    PartialDecode { failed: usize, total: usize },
}

impl CommandError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::Divergence(_) => 3,
            CommandError::PartialDecode { .. } => 4,
            _ => 2,
        }
    }
}

fn input(msg: impl Into<String>) -> CommandError {
    CommandError::Input(msg.into())
}

fn create_dir(dir: &Path) -> Result<(), CommandError> {
    fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))
}

/// Writes the effective configuration to the run log (stderr).
pub fn echo_config(command: &str, config: &RunConfig) {
    let mut text = format!("# g2p {command}: effective configuration\n");
    for line in config.to_string().lines() {
        let _ = writeln!(text, "#   {line}");
    }
    eprint!("{text}");
}

pub struct PrepareOptions {
    pub lexicon: PathBuf,
    pub train: PathBuf,
    pub validation: Option<PathBuf>,
    pub test: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrepareCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

pub fn cmd_prepare(opts: &PrepareOptions, config: &RunConfig) -> Result<PrepareCounts, CommandError> {
    let text = read_text(&opts.lexicon)?;
    let entries = parse_lexicon(&text, config.format()?, config.strip_stress()?)
        .map_err(|e| input(format!("{}: {e}", opts.lexicon.display())))?;
    let train_list = read_text(&opts.train)?;
    let valid_list = opts.validation.as_deref().map(read_text).transpose()?;
    let test_list = read_text(&opts.test)?;
    let (split, report) =
        load_split(&entries, &train_list, valid_list.as_deref(), &test_list).map_err(|e| input(e.to_string()))?;
    if !report.unlisted.is_empty() {
        eprintln!("note: {} lexicon words are in no partition", report.unlisted.len());
    }
    if !report.missing.is_empty() {
        eprintln!("warning: {} listed words are not in the lexicon", report.missing.len());
        for (p, w) in report.missing.iter().take(20) {
            eprintln!("  {p}: {w}");
        }
    }
    let used: Vec<LexiconEntry> =
        split.train.iter().chain(&split.validation).chain(&split.test).cloned().collect();
    let (letters, phonemes) =
        build_symbol_tables(&used).map_err(|_| input("no lexicon word is listed in any partition"))?;
    let counts = PrepareCounts { train: split.train.len(), validation: split.validation.len(), test: split.test.len() };
    Dataset { split, letters, phonemes }.write(&opts.out, &entries)?;
    Ok(counts)
}

pub struct AlignOptions {
    pub data: PathBuf,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignSummary {
    pub log_likelihoods: Vec<f64>,
    pub skipped: usize,
    pub failures: usize,
    pub pairs: usize,
    pub compounds: usize,
}

/// Trains the aligner on the training partition, then aligns training and
/// validation pairs. Also writes `<out>.em.tsv` with the likelihood log.
pub fn cmd_align(opts: &AlignOptions, config: &RunConfig) -> Result<AlignSummary, CommandError> {
    let data = Dataset::read(&opts.data)?;
    let (iters, tol) = config.em()?;
    let em = em_train_aligner(&data.split.train, iters, tol).map_err(|e| match e {
        AlignError::EmptyCorpus => input("no training pair is alignable (every pronunciation is too long)"),
        other => input(other.to_string()),
    })?;
    let mut log = String::from("iteration\tlog_likelihood\n");
    for (i, ll) in em.log_likelihoods.iter().enumerate() {
        let _ = writeln!(log, "{i}\t{ll:.6}");
        eprintln!("em iteration {i}: log-likelihood {ll:.6}");
    }
    for (w, p) in &em.skipped {
        eprintln!("skipped {w}: {} phonemes for {} letters", p.len(), w.chars().count());
    }
    let mut phonemes = data.phonemes.clone();
    let corpus: Vec<LexiconEntry> = data.split.train.iter().chain(&data.split.validation).cloned().collect();
    let (pairs, report) = align_corpus(&corpus, &em.table, &mut phonemes);
    for f in &report.failures {
        eprintln!("not aligned: {f}");
    }
    write_text(&opts.out, &write_aligned(&pairs))?;
    let mut log_path = opts.out.clone().into_os_string();
    log_path.push(".em.tsv");
    write_text(Path::new(&log_path), &log)?;
    Ok(AlignSummary {
        log_likelihoods: em.log_likelihoods,
        skipped: em.skipped.len(),
        failures: report.failures.len(),
        pairs: pairs.len(),
        compounds: report.added_compounds.len(),
    })
}

pub struct TrainOptions {
    pub data: PathBuf,
    pub aligned: Option<PathBuf>,
    pub out: PathBuf,
}

struct DirSink {
    dir: PathBuf,
    history: File,
    keep: bool,
}

impl DirSink {
    fn write(&mut self, record: &EpochRecord, model: &G2PModel<f32>, is_best: bool) -> io::Result<()> {
        writeln!(self.history, "{}", history_line(record))?;
        self.history.flush()?;
        let bytes = encode_model(model);
        if self.keep {
            fs::write(self.dir.join("checkpoints").join(format!("epoch-{:04}.g2pm", record.epoch)), &bytes)?;
        }
        if is_best {
            fs::write(self.dir.join("best.g2pm"), &bytes)?;
            fs::write(self.dir.join("best.txt"), format!("epoch {}\n", record.epoch))?;
        }
        Ok(())
    }
}

impl CheckpointSink<f32> for DirSink {
    fn epoch_end(&mut self, record: &EpochRecord, model: &G2PModel<f32>, is_best: bool) -> Result<(), String> {
        let valid = record.valid_ce.map_or_else(String::new, |v| format!(" valid {v:.4}"));
        eprintln!("epoch {}: train {:.4}{valid} lr {}", record.epoch, record.train_ce, record.lr);
        self.write(record, model, is_best).map_err(|e| format!("{}: {e}", self.dir.display()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub epochs: usize,
    pub best_epoch: usize,
    pub final_train_ce: f64,
}

/// Trains a model into `out`: `history.tsv`, `run.conf`, per-epoch
/// checkpoints under `checkpoints/`, `best.g2pm` with `best.txt`, and the
/// returned model as `model.g2pm`.
pub fn cmd_train(opts: &TrainOptions, config: &RunConfig) -> Result<TrainSummary, CommandError> {
    let model_config = config.model_config()?;
    let schedule = config.schedule()?;
    let data = Dataset::read(&opts.data)?;
    let arch = model_config.architecture;
    let mut phonemes = data.phonemes.clone();
    let (train_pairs, valid_pairs): (Vec<AlignedPair>, Vec<AlignedPair>);
    if arch.uses_alignment() {
        let path = opts
            .aligned
            .as_ref()
            .ok_or_else(|| input(format!("architecture {} needs an aligned corpus (--aligned)", arch.name())))?;
        let pairs = read_aligned(&read_text(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
        phonemes.extend(pairs.iter().flat_map(|p| p.slots.iter().map(ToString::to_string)));
        let words = |entries: &[LexiconEntry]| entries.iter().map(LexiconEntry::word_string).collect::<BTreeSet<_>>();
        let (train_words, valid_words) = (words(&data.split.train), words(&data.split.validation));
        train_pairs = pairs.iter().filter(|p| train_words.contains(&p.word())).cloned().collect();
        valid_pairs = pairs.iter().filter(|p| valid_words.contains(&p.word())).cloned().collect();
        let other = pairs.len() - train_pairs.len() - valid_pairs.len();
        if other > 0 {
            eprintln!("warning: {other} aligned pairs belong to neither training nor validation words; ignored");
        }
    } else {
        if opts.aligned.is_some() {
            eprintln!("warning: {} does not use alignments; --aligned ignored", arch.name());
        }
        (train_pairs, valid_pairs) = (Vec::new(), Vec::new());
    }
    let mut model = build_model::<f32>(model_config, data.letters.clone(), phonemes)
        .map_err(|e| input(e.to_string()))?;
    let encode = |pairs: &[AlignedPair], entries: &[LexiconEntry]| -> Result<Vec<EncodedExample>, CommandError> {
        let out = if arch.uses_alignment() {
            pairs.iter().map(|p| model.encode_aligned(p)).collect::<Result<Vec<_>, _>>()
        } else {
            entries
                .iter()
                .flat_map(|e| e.pronunciations.iter().map(move |p| (e, p)))
                .map(|(e, p)| model.encode_pronunciation(&e.word, p))
                .collect()
        };
        out.map_err(|e| input(e.to_string()))
    };
    let train_set = encode(&train_pairs, &data.split.train)?;
    let valid_set = encode(&valid_pairs, &data.split.validation)?;
    eprintln!(
        "{} training and {} validation examples; {} parameters",
        train_set.len(),
        valid_set.len(),
        model.config().param_count(model.letters().len(), model.phonemes().len())
    );

    create_dir(&opts.out)?;
    let keep = config.keep_checkpoints()?;
    if keep {
        create_dir(&opts.out.join("checkpoints"))?;
    }
    write_text(&opts.out.join("run.conf"), &config.to_string())?;
    let history_path = opts.out.join("history.tsv");
    let mut history = File::create(&history_path).map_err(|e| input(format!("{}: {e}", history_path.display())))?;
    writeln!(history, "{HISTORY_HEADER}").map_err(|e| input(e.to_string()))?;
    let mut sink = DirSink { dir: opts.out.clone(), history, keep };
    let outcome = train(&mut model, &train_set, &valid_set, &schedule, &mut sink).map_err(|e| match e {
        TrainError::Divergence { .. } => CommandError::Divergence(e),
        other => input(other.to_string()),
    })?;
    fs::write(opts.out.join("model.g2pm"), encode_model(&model)).map_err(|e| input(e.to_string()))?;
    Ok(TrainSummary {
        epochs: outcome.history.len(),
        best_epoch: outcome.best_epoch,
        final_train_ce: outcome.history.last().map_or(f64::NAN, |r| r.train_ce),
    })
}

pub enum WordSource {
    File(PathBuf),
    Partition { data: PathBuf, partition: Partition },
}

pub struct DecodeOptions {
    pub model: PathBuf,
    pub words: WordSource,
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeSummary {
    pub words: usize,
    pub failed: usize,
}

fn read_words(source: &WordSource) -> Result<Vec<String>, CommandError> {
    match source {
        WordSource::File(path) => Ok(read_text(path)?
            .lines()
            .filter_map(|l| l.split_whitespace().next())
            .map(|w| w.chars().flat_map(char::to_uppercase).collect())
            .collect()),
        WordSource::Partition { data, partition } => {
            Ok(Dataset::read(data)?.split.partition(*partition).iter().map(LexiconEntry::word_string).collect())
        }
    }
}

/// Decodes a word list. Words that fail are reported on stderr with their
/// position and omitted from the output, which still covers every other word.
pub fn cmd_decode(opts: &DecodeOptions, config: &RunConfig) -> Result<DecodeSummary, CommandError> {
    let beam = config.beam()?;
    let nbest = config.nbest()?;
    let workers = config.workers()?;
    let model =
        load_model(&opts.model).map_err(|source| CommandError::ModelFile { path: opts.model.clone(), source })?;
    let words = read_words(&opts.words)?;
    let letters: Vec<Vec<char>> = words.iter().map(|w| w.chars().collect()).collect();
    let results = decode_batch(&model, &letters, &beam, nbest, workers);
    let mut out = String::new();
    let mut failed = 0;
    for (word, result) in words.iter().zip(&results) {
        match result {
            Ok(hyps) => write_decoded(&mut out, word, hyps),
            Err(e) => {
                failed += 1;
                eprintln!("error: {e}");
            }
        }
    }
    write_text(&opts.out, &out)?;
    let summary = DecodeSummary { words: words.len(), failed };
    if failed > 0 {
        return Err(CommandError::PartialDecode { failed, total: words.len() });
    }
    Ok(summary)
}

pub struct EvalOptions {
    pub hypotheses: PathBuf,
    pub data: PathBuf,
    pub partition: Partition,
    pub out: Option<PathBuf>,
    pub per_word: Option<PathBuf>,
}

fn merge(parts: Vec<EvalReport>) -> EvalReport {
    let mut all = EvalReport { records: Vec::new(), phoneme_edits: 0, reference_phonemes: 0, word_errors: 0, words: 0 };
    for p in parts {
        all.records.extend(p.records);
        all.phoneme_edits += p.phoneme_edits;
        all.reference_phonemes += p.reference_phonemes;
        all.word_errors += p.word_errors;
        all.words += p.words;
    }
    all
}

/// Scores the best hypothesis per word against a partition, splitting the
/// words over `workers` threads; totals are independent of the split.
pub fn cmd_eval(opts: &EvalOptions, config: &RunConfig) -> Result<EvalReport, CommandError> {
    let workers = config.workers()?;
    let data = Dataset::read(&opts.data)?;
    let text = read_text(&opts.hypotheses)?;
    let hyps = read_best_hypotheses(&text).map_err(|e| input(format!("{}: {e}", opts.hypotheses.display())))?;
    let refs = data.split.partition(opts.partition);
    let describe = |e: MetricsError| match e {
        MetricsError::MissingHypothesis(w) => input(format!("no hypothesis for {} word {w}", opts.partition)),
        other => input(other.to_string()),
    };
    // Full-list pass first so coverage errors are reported the same way for
    // any worker count.
    evaluate(&hyps, &[]).map_err(describe)?;
    let chunk = refs.len().div_ceil(workers.max(1)).max(1);
    let parts: Vec<Result<EvalReport, MetricsError>> = thread::scope(|s| {
        let handles: Vec<_> = refs.chunks(chunk).map(|c| s.spawn(|| evaluate(&hyps, c))).collect();
        handles.into_iter().map(|h| h.join().expect("eval worker panicked")).collect()
    });
    let report = merge(parts.into_iter().collect::<Result<Vec<_>, _>>().map_err(describe)?);
    let summary = summary_line(&report);
    if let Some(path) = &opts.out {
        write_text(path, &format!("{summary}\n"))?;
    }
    if let Some(path) = &opts.per_word {
        write_text(path, &per_word_tsv(&report))?;
    }
    Ok(report)
}
