//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use g2p_core::lexicon::Partition;

use crate::commands::{
    cmd_align, cmd_decode, cmd_eval, cmd_prepare, cmd_train, echo_config, AlignOptions, CommandError,
    DecodeOptions, EvalOptions, PrepareOptions, TrainOptions, WordSource,
};
use crate::config::RunConfig;
use crate::dataset::read_text;
use crate::formats::summary_line;

#[derive(Debug, Parser)]
#[command(name = "g2p", version, about = "Grapheme-to-phoneme conversion with LSTM networks")]
pub struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one setting; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a lexicon and split it into train, validation and test partitions.
    Prepare(PrepareArgs),
    /// Learn letter-to-phoneme alignments and align the training data.
    Align(AlignArgs),
    /// Train a model.
    Train(TrainArgs),
    /// Decode words with a trained model.
    Decode(DecodeArgs),
    /// Score decoded pronunciations against a partition.
    Eval(EvalArgs),
    /// Print every setting with its default and description.
    Settings,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub lexicon: PathBuf,
    /// cmudict or tabular.
    #[arg(long)]
    pub format: Option<String>,
    /// Keep stress digits on phonemes.
    #[arg(long)]
    pub keep_stress: bool,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub validation: Option<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    /// Dataset directory to create.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Aligned corpus; required by uni and bi.
    #[arg(long)]
    pub aligned: Option<PathBuf>,
    /// Run directory for the model, history and checkpoints.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub arch: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// One word per line.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    pub words: Option<PathBuf>,
    /// Decode a partition of a prepared dataset instead.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_parser = parse_partition, default_value = "test")]
    pub partition: Partition,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub band: Option<f64>,
    #[arg(long)]
    pub max_beam: Option<usize>,
    #[arg(long)]
    pub max_length: Option<usize>,
    #[arg(long)]
    pub nbest: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Decoder output.
    #[arg(long = "hyp")]
    pub hypotheses: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_parser = parse_partition, default_value = "test")]
    pub partition: Partition,
    /// Report file for the summary line.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-word TSV of hypothesis, chosen reference and edits.
    #[arg(long)]
    pub per_word: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

fn parse_partition(s: &str) -> Result<Partition, String> {
    match s {
        "train" => Ok(Partition::Train),
        "validation" | "valid" => Ok(Partition::Validation),
        "test" => Ok(Partition::Test),
        _ => Err(format!("unknown partition {s:?}; expected train, validation or test")),
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CommandError> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config.merge_file(&read_text(path)?, &path.display().to_string())?;
    }
    for pair in &cli.overrides {
        config.set_pair(pair)?;
    }
    Ok(config)
}

fn set_some<T: ToString>(config: &mut RunConfig, key: &str, value: &Option<T>) -> Result<(), CommandError> {
    if let Some(v) = value {
        config.set(key, &v.to_string())?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CommandError> {
    let mut config = load_config(cli)?;
    match &cli.command {
        Command::Prepare(a) => {
            set_some(&mut config, "format", &a.format)?;
            if a.keep_stress {
                config.set("strip_stress", "false")?;
            }
            echo_config("prepare", &config);
            let opts = PrepareOptions {
                lexicon: a.lexicon.clone(),
                train: a.train.clone(),
                validation: a.validation.clone(),
                test: a.test.clone(),
                out: a.out.clone(),
            };
            let c = cmd_prepare(&opts, &config)?;
            println!("train {} validation {} test {}", c.train, c.validation, c.test);
        }
        Command::Align(a) => {
            set_some(&mut config, "em_iters", &a.iters)?;
            set_some(&mut config, "em_tol", &a.tol)?;
            echo_config("align", &config);
            let s = cmd_align(&AlignOptions { data: a.data.clone(), out: a.out.clone() }, &config)?;
            println!(
                "aligned {} pairs; {} skipped, {} failed, {} compound symbols; final log-likelihood {:.6}",
                s.pairs,
                s.skipped,
                s.failures,
                s.compounds,
                s.log_likelihoods.last().copied().unwrap_or(f64::NAN)
            );
        }
        Command::Train(a) => {
            set_some(&mut config, "architecture", &a.arch)?;
            set_some(&mut config, "seed", &a.seed)?;
            echo_config("train", &config);
            let opts = TrainOptions { data: a.data.clone(), aligned: a.aligned.clone(), out: a.out.clone() };
            let s = cmd_train(&opts, &config)?;
            println!("trained {} epochs; best epoch {}; final train CE {:.4}", s.epochs, s.best_epoch, s.final_train_ce);
        }
        Command::Decode(a) => {
            set_some(&mut config, "band", &a.band)?;
            set_some(&mut config, "max_beam", &a.max_beam)?;
            set_some(&mut config, "max_length", &a.max_length)?;
            set_some(&mut config, "nbest", &a.nbest)?;
            set_some(&mut config, "workers", &a.workers)?;
            echo_config("decode", &config);
            let words = match (&a.words, &a.data) {
                (Some(path), _) => WordSource::File(path.clone()),
                (None, Some(data)) => WordSource::Partition { data: data.clone(), partition: a.partition },
                (None, None) => unreachable!("clap requires --words or --data"),
            };
            let s = cmd_decode(&DecodeOptions { model: a.model.clone(), words, out: a.out.clone() }, &config)?;
            println!("decoded {} words", s.words);
        }
        Command::Eval(a) => {
            set_some(&mut config, "workers", &a.workers)?;
            echo_config("eval", &config);
            let opts = EvalOptions {
                hypotheses: a.hypotheses.clone(),
                data: a.data.clone(),
                partition: a.partition,
                out: a.out.clone(),
                per_word: a.per_word.clone(),
            };
            let report = cmd_eval(&opts, &config)?;
            println!("{}", summary_line(&report));
        }
        Command::Settings => {
            for (key, default, about) in crate::config::SETTINGS {
                println!("{key} = {}\t# {about} (default {default})", config.raw(key));
            }
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return u8::try_from(e.exit_code()).unwrap_or(2);
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
