//! Flat `key = value` run configuration.
//!
//! Settings come from three layers, later ones winning: built-in defaults, an
//! optional config file, then command-line overrides. Unknown keys are
//! rejected at every layer.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use g2p_core::decoder::BeamConfig;
use g2p_core::lexicon::LexiconFormat;
use g2p_core::model::{Architecture, LrMode, ModelConfig, TrainSchedule};
use g2p_core::nn::RngSeed;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{origin}: unknown key {key:?}")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: expected `key = value`, got {text:?}")]
    Syntax { origin: String, text: String },
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
}

/// `(key, default, description)` for every recognized setting.
pub const SETTINGS: &[(&str, &str, &str)] = &[
    ("format", "cmudict", "lexicon format: cmudict or tabular"),
    ("strip_stress", "true", "drop stress digits from phonemes"),
    ("architecture", "bi", "encdec, uni or bi"),
    ("letter_embedding", "50", "letter embedding size"),
    ("phoneme_embedding", "50", "phoneme embedding size"),
    ("hidden", "300", "LSTM hidden size"),
    ("layers", "1", "LSTM layers (per direction, and per side for encdec)"),
    ("window", "3", "letters visible per position (uni, bi)"),
    ("init_scale", "0.05", "weights start uniform on [-init_scale, init_scale]"),
    ("seed", "1", "seed for initialization and shuffling"),
    ("schedule", "piecewise", "piecewise or validation"),
    ("segments", "10x0.1,2x0.05,70x0.01", "piecewise schedule as EPOCHSxRATE,..."),
    ("lr", "0.1", "initial per-sample rate for the validation schedule"),
    ("max_epochs", "100", "epoch cap for the validation schedule"),
    ("minibatch", "100", "examples per update"),
    ("sort_by_length", "auto", "bucket minibatches by length: auto, true or false"),
    ("clip", "1.0", "elementwise gradient clip; none disables"),
    ("keep_checkpoints", "true", "write a checkpoint after every epoch"),
    ("em_iters", "50", "maximum EM iterations for the aligner"),
    ("em_tol", "1e-6", "stop EM when the log-likelihood gains less than this"),
    ("band", "1.0", "beam band in natural-log likelihood"),
    ("max_beam", "100", "hypotheses kept per step"),
    ("max_length", "auto", "encdec output cap; auto is 4 x letters + 5"),
    ("nbest", "1", "hypotheses written per word"),
    ("workers", "1", "decoding threads"),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { values: SETTINGS.iter().map(|&(k, v, _)| (k, v.to_string())).collect() }
    }
}

fn known(key: &str) -> Option<&'static str> {
    SETTINGS.iter().find(|(k, _, _)| *k == key).map(|(k, _, _)| *k)
}

impl RunConfig {
    /// Applies a config file's contents; `origin` names it in errors.
    pub fn merge_file(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("{origin}:{}", n + 1);
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { origin: at, text: raw.to_string() });
            };
            self.set_from(k.trim(), v.trim(), &at)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.set_from(key, value, "override")
    }

    fn set_from(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        let k = known(key).ok_or_else(|| ConfigError::UnknownKey { origin: origin.into(), key: key.into() })?;
        self.values.insert(k, value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), ConfigError> {
        let Some((k, v)) = pair.split_once('=') else {
            return Err(ConfigError::Syntax { origin: "override".into(), text: pair.into() });
        };
        self.set(k.trim(), v.trim())
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_else(|| panic!("setting {key} is not declared"))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let v = self.raw(key);
        v.parse().map_err(|e: T::Err| bad(key, v, e))
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => Err(bad(key, v, "expected true or false")),
        }
    }

    fn auto<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        if self.raw(key) == "auto" { Ok(None) } else { self.parsed(key).map(Some) }
    }

    pub fn format(&self) -> Result<LexiconFormat, ConfigError> {
        match self.raw("format") {
            "cmudict" => Ok(LexiconFormat::CmuDict),
            "tabular" => Ok(LexiconFormat::Tabular),
            v => Err(bad("format", v, "expected cmudict or tabular")),
        }
    }

    pub fn strip_stress(&self) -> Result<bool, ConfigError> {
        self.flag("strip_stress")
    }

    pub fn architecture(&self) -> Result<Architecture, ConfigError> {
        self.parsed("architecture")
    }

    pub fn model_config(&self) -> Result<ModelConfig, ConfigError> {
        let config = ModelConfig {
            architecture: self.architecture()?,
            letter_embedding: self.parsed("letter_embedding")?,
            phoneme_embedding: self.parsed("phoneme_embedding")?,
            hidden: self.parsed("hidden")?,
            layers: self.parsed("layers")?,
            window: self.parsed("window")?,
            seed: RngSeed(self.parsed("seed")?),
            init_scale: self.parsed("init_scale")?,
        };
        config.validate().map_err(|e| bad("model", "", e))?;
        Ok(config)
    }

    pub fn schedule(&self) -> Result<TrainSchedule, ConfigError> {
        let mode = match self.raw("schedule") {
            "piecewise" => LrMode::Piecewise { segments: parse_segments(self.raw("segments"))? },
            "validation" => LrMode::ValidationDriven { initial: self.parsed("lr")?, max_epochs: self.parsed("max_epochs")? },
            v => return Err(bad("schedule", v, "expected piecewise or validation")),
        };
        let sort_by_length = match self.raw("sort_by_length") {
            "auto" => self.architecture()?.uses_alignment(),
            _ => self.flag("sort_by_length")?,
        };
        let clip = match self.raw("clip") {
            "none" => None,
            _ => Some(self.parsed("clip")?),
        };
        let schedule = TrainSchedule { mode, minibatch: self.parsed("minibatch")?, sort_by_length, clip };
        schedule.validate().map_err(|e| bad("schedule", self.raw("schedule"), e))?;
        Ok(schedule)
    }

    pub fn keep_checkpoints(&self) -> Result<bool, ConfigError> {
        self.flag("keep_checkpoints")
    }

    pub fn em(&self) -> Result<(usize, f64), ConfigError> {
        Ok((self.parsed("em_iters")?, self.parsed("em_tol")?))
    }

    pub fn beam(&self) -> Result<BeamConfig, ConfigError> {
        let beam = BeamConfig {
            band: self.parsed("band")?,
            max_beam: self.parsed("max_beam")?,
            max_length: self.auto("max_length")?,
        };
        beam.validate().map_err(|e| bad("beam", "", e))?;
        Ok(beam)
    }

    pub fn nbest(&self) -> Result<usize, ConfigError> {
        match self.parsed("nbest")? {
            0 => Err(bad("nbest", "0", "must be at least 1")),
            n => Ok(n),
        }
    }

    pub fn workers(&self) -> Result<usize, ConfigError> {
        match self.parsed("workers")? {
            0 => Err(bad("workers", "0", "must be at least 1")),
            n => Ok(n),
        }
    }
}

/// Every setting as `key = value`, one per line, in declaration order.
impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, _, _) in SETTINGS {
            writeln!(f, "{k} = {}", self.values[k])?;
        }
        Ok(())
    }
}

fn bad(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::Value { key: key.into(), value: value.into(), reason: reason.to_string() }
}

/// Parses `10x0.1,2x0.05`.
pub fn parse_segments(text: &str) -> Result<Vec<(usize, f64)>, ConfigError> {
    text.split(',')
        .map(|seg| {
            let seg = seg.trim();
            let (n, lr) = seg.split_once('x').ok_or_else(|| bad("segments", seg, "expected EPOCHSxRATE"))?;
            let n = n.trim().parse().map_err(|e| bad("segments", seg, e))?;
            let lr = lr.trim().parse().map_err(|e| bad("segments", seg, e))?;
            Ok((n, lr))
        })
        .collect()
}
