//! Likelihood-band beam search.
//!
//! At each step every live hypothesis is extended by every output symbol.
//! Candidates scoring more than `band` nats below the step's best are
//! dropped, and the rest are cut to `max_beam` by score, breaking ties by the
//! symbol sequence. Alignment models run a fixed `T + 2` steps; the
//! encoder-decoder runs until `</os>` or `max_length`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::lexicon::{BOS, COMPOUND_SEP, EOS, NULL};
use crate::model::{G2PModel, ModelError, ModelSearch, SearchState};
use crate::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("letter {0:?} is not in the vocabulary")]
    UnknownLetter(char),
    #[error("empty word")]
    EmptyWord,
    #[error("invalid beam configuration: {0}")]
    Config(&'static str),
    #[error("beam emptied before any hypothesis finished")]
    Internal,
    #[error(transparent)]
    Model(ModelError),
}

impl From<ModelError> for DecodeError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownSymbol(s) if s.chars().count() == 1 => {
                DecodeError::UnknownLetter(s.chars().next().unwrap_or_default())
            }
            ModelError::EmptyWord => DecodeError::EmptyWord,
            other => DecodeError::Model(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamConfig {
    /// Width of the kept band in natural-log likelihood.
    pub band: f64,
    pub max_beam: usize,
    /// Step cap for the encoder-decoder; `None` means `4 · letters + 5`.
    pub max_length: Option<usize>,
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self { band: 1.0, max_beam: 100, max_length: None }
    }
}

impl BeamConfig {
    pub fn greedy() -> Self {
        Self { band: 0.0, max_beam: 1, max_length: None }
    }

    pub fn validate(&self) -> Result<(), DecodeError> {
        if !(self.band >= 0.0) {
            return Err(DecodeError::Config("band must be non-negative"));
        }
        if self.max_beam == 0 || self.max_length == Some(0) {
            return Err(DecodeError::Config("beam and length caps must be at least 1"));
        }
        Ok(())
    }
}

/// How long a search runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    /// Exactly this many steps.
    Fixed(usize),
    /// Until `end` is emitted, for at most `max` steps.
    UntilEnd { end: usize, max: usize },
}

/// A left-to-right scorer over a fixed output vocabulary.
pub trait SearchSpace {
    type State: Clone;

    fn vocab_size(&self) -> usize;
    fn initial_state(&self) -> Self::State;
    /// Log-probabilities of every symbol at `position` after `prev`
    /// (`<os>` at position 0), and the advanced state.
    fn step(&self, state: &Self::State, position: usize, prev: usize) -> (Vec<f64>, Self::State);
    fn horizon(&self) -> Horizon;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis<S> {
    pub symbols: Vec<usize>,
    pub log_likelihood: f64,
    pub state: S,
    pub finished: bool,
}

fn rank(a: (f64, &[usize]), b: (f64, &[usize])) -> Ordering {
    b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then_with(|| a.1.cmp(b.1))
}

/// Beam search; returns up to `nbest` finished hypotheses, best first.
/// When a capped search finishes nothing, the truncated survivors are
/// returned instead.
pub fn beam_search<S: SearchSpace>(
    space: &S,
    beam: &BeamConfig,
    nbest: usize,
) -> Result<Vec<Hypothesis<S::State>>, DecodeError> {
    beam.validate()?;
    let (steps, end) = match space.horizon() {
        Horizon::Fixed(n) => (n, None),
        Horizon::UntilEnd { end, max } => (max, Some(end)),
    };
    let mut live = vec![Hypothesis {
        symbols: Vec::new(),
        log_likelihood: 0.0,
        state: space.initial_state(),
        finished: false,
    }];
    let mut finished: Vec<Hypothesis<S::State>> = Vec::new();
    for position in 0..steps {
        let mut expanded = Vec::with_capacity(live.len());
        let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
        for (h_idx, h) in live.iter().enumerate() {
            let prev = h.symbols.last().copied().unwrap_or(BOS);
            let (logp, next) = space.step(&h.state, position, prev);
            for (v, lp) in logp.iter().enumerate() {
                candidates.push((h_idx, v, h.log_likelihood + lp));
            }
            expanded.push(next);
        }
        let best = candidates.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        candidates.retain(|c| c.2 >= best - beam.band);
        let seq = |c: &(usize, usize, f64)| {
            let mut s = live[c.0].symbols.clone();
            s.push(c.1);
            s
        };
        let mut ranked: Vec<(Vec<usize>, usize, f64)> = candidates.iter().map(|c| (seq(c), c.0, c.2)).collect();
        ranked.sort_by(|a, b| rank((a.2, &a.0), (b.2, &b.0)));
        ranked.truncate(beam.max_beam);
        let mut next_live = Vec::with_capacity(ranked.len());
        for (symbols, parent, score) in ranked {
            let done = end.is_some_and(|e| symbols.last() == Some(&e));
            let h = Hypothesis { symbols, log_likelihood: score, state: expanded[parent].clone(), finished: done };
            if done {
                finished.push(h);
            } else {
                next_live.push(h);
            }
        }
        live = next_live;
        if live.is_empty() {
            break;
        }
    }
    if end.is_none() {
        for mut h in live {
            h.finished = true;
            finished.push(h);
        }
    } else if finished.is_empty() {
        // Nothing reached the end symbol within the cap: fall back to the
        // truncated hypotheses, still marked unfinished.
        finished = live;
    }
    if finished.is_empty() {
        return Err(DecodeError::Internal);
    }
    finished.sort_by(|a, b| rank((a.log_likelihood, &a.symbols), (b.log_likelihood, &b.symbols)));
    finished.truncate(nbest.max(1));
    Ok(finished)
}

/// Argmax at every step, lowest index on ties.
pub fn greedy_search<S: SearchSpace>(space: &S) -> (Vec<usize>, f64) {
    let (steps, end) = match space.horizon() {
        Horizon::Fixed(n) => (n, None),
        Horizon::UntilEnd { end, max } => (max, Some(end)),
    };
    let mut state = space.initial_state();
    let mut symbols = Vec::new();
    let mut score = 0.0;
    for position in 0..steps {
        let prev = symbols.last().copied().unwrap_or(BOS);
        let (logp, next) = space.step(&state, position, prev);
        let mut arg = 0;
        for (v, &lp) in logp.iter().enumerate() {
            if lp > logp[arg] {
                arg = v;
            }
        }
        symbols.push(arg);
        score += logp[arg];
        state = next;
        if end == Some(arg) {
            break;
        }
    }
    (symbols, score)
}

impl<R: Real> SearchSpace for ModelSearch<'_, R> {
    type State = SearchState<R>;

    fn vocab_size(&self) -> usize {
        self.model().output_vocab()
    }

    fn initial_state(&self) -> Self::State {
        ModelSearch::initial_state(self)
    }

    fn step(&self, state: &Self::State, position: usize, prev: usize) -> (Vec<f64>, Self::State) {
        ModelSearch::step(self, state, position, prev)
    }

    fn horizon(&self) -> Horizon {
        let t = self.letter_count();
        if self.model().config().architecture.uses_alignment() {
            Horizon::Fixed(t + 2)
        } else {
            Horizon::UntilEnd { end: EOS, max: 4 * t + 5 }
        }
    }
}

/// A decoded pronunciation.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub phonemes: Vec<String>,
    /// Raw output symbols, boundary symbols included.
    pub symbols: Vec<usize>,
    pub log_likelihood: f64,
}

/// Maps raw output symbols to phonemes: boundary and null symbols are
/// dropped and compounds split in order.
pub fn postprocess<'a>(symbols: &[usize], name: impl Fn(usize) -> &'a str) -> Vec<String> {
    let mut out = Vec::new();
    for &s in symbols {
        if s == BOS || s == EOS || s == NULL {
            continue;
        }
        out.extend(name(s).split(COMPOUND_SEP).map(ToString::to_string));
    }
    out
}

/// N-best pronunciations of `word`, best first.
pub fn beam_decode<R: Real>(
    model: &G2PModel<R>,
    word: &[char],
    beam: &BeamConfig,
    nbest: usize,
) -> Result<Vec<Decoded>, DecodeError> {
    let search = model.search(word)?;
    let hyps = match beam.max_length {
        Some(max) if !model.config().architecture.uses_alignment() => {
            beam_search(&Capped { inner: &search, max }, beam, nbest)?
        }
        _ => beam_search(&search, beam, nbest)?,
    };
    let table = model.phonemes();
    Ok(hyps
        .into_iter()
        .map(|h| Decoded {
            phonemes: postprocess(&h.symbols, |s| table.symbol(s).unwrap_or("")),
            symbols: h.symbols,
            log_likelihood: h.log_likelihood,
        })
        .collect())
}

struct Capped<'a, S> {
    inner: &'a S,
    max: usize,
}

impl<S: SearchSpace> SearchSpace for Capped<'_, S> {
    type State = S::State;

    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    fn initial_state(&self) -> Self::State {
        self.inner.initial_state()
    }

    fn step(&self, state: &Self::State, position: usize, prev: usize) -> (Vec<f64>, Self::State) {
        self.inner.step(state, position, prev)
    }

    fn horizon(&self) -> Horizon {
        match self.inner.horizon() {
            Horizon::UntilEnd { end, .. } => Horizon::UntilEnd { end, max: self.max },
            fixed => fixed,
        }
    }
}
