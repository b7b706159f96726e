//! The three G2P architectures.
//!
//! - Encoder-decoder: the encoder reads `<s>` followed by the reversed
//!   letters; its final `(h, c)` per layer seeds the matching decoder layer,
//!   which reads `<os> p₁ … pₙ` and predicts `p₁ … pₙ </os>`.
//! - Uni-directional: over positions `<s> l₁ … l_T </s>` the input is the
//!   embeddings of a window of letters (current plus following, padded with
//!   `</s>`) concatenated with the embedding of the previous output; targets
//!   are `<os> slot₁ … slot_T </os>`.
//! - Bi-directional: a forward stack fed like the uni-directional model and a
//!   backward stack fed letters only. Forward layers above the first read the
//!   concatenated forward and backward outputs below; backward layers read the
//!   backward outputs below, so the backward stack never sees output symbols.
//!   A final forward layer over the top pair feeds the softmax.

mod network;
mod train;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::aligner::AlignedPair;
use crate::lexicon::{SymbolTable, EOS};
use crate::nn::{LstmCellParams, Matrix, NnError, Parameters, RngSeed};
use crate::Real;

pub use network::{ModelSearch, SearchState, TeacherForced};
pub use train::{
    mean_cross_entropy, train, CheckpointSink, EpochRecord, HalvingController, LrMode, TrainError, TrainOutcome,
    TrainSchedule,
    IMPROVEMENT_THRESHOLD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    EncoderDecoder,
    Unidirectional,
    Bidirectional,
}

impl Architecture {
    pub fn tag(self) -> u8 {
        match self {
            Architecture::EncoderDecoder => 0,
            Architecture::Unidirectional => 1,
            Architecture::Bidirectional => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Architecture::EncoderDecoder),
            1 => Some(Architecture::Unidirectional),
            2 => Some(Architecture::Bidirectional),
            _ => None,
        }
    }

    pub fn uses_alignment(self) -> bool {
        !matches!(self, Architecture::EncoderDecoder)
    }

    pub fn name(self) -> &'static str {
        match self {
            Architecture::EncoderDecoder => "encdec",
            Architecture::Unidirectional => "uni",
            Architecture::Bidirectional => "bi",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for Architecture {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "encdec" | "enc-dec" | "encoder-decoder" => Ok(Architecture::EncoderDecoder),
            "uni" | "unidirectional" => Ok(Architecture::Unidirectional),
            "bi" | "bidirectional" => Ok(Architecture::Bidirectional),
            other => Err(ModelError::Config(alloc::format!("unknown architecture {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub architecture: Architecture,
    pub letter_embedding: usize,
    pub phoneme_embedding: usize,
    pub hidden: usize,
    pub layers: usize,
    /// Letters visible per position (current plus following); unused by the
    /// encoder-decoder.
    pub window: usize,
    pub seed: RngSeed,
    pub init_scale: f64,
}

impl ModelConfig {
    pub fn new(architecture: Architecture) -> Self {
        Self {
            architecture,
            letter_embedding: 50,
            phoneme_embedding: 50,
            hidden: 300,
            layers: 1,
            window: 3,
            seed: RngSeed(1),
            init_scale: 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: &str| Err(ModelError::Config(alloc::format!("{what} must be at least 1")));
        if self.letter_embedding == 0 {
            return bad("letter embedding dimension");
        }
        if self.phoneme_embedding == 0 {
            return bad("phoneme embedding dimension");
        }
        if self.hidden == 0 {
            return bad("hidden dimension");
        }
        if self.layers == 0 {
            return bad("layer count");
        }
        if self.window == 0 {
            return bad("window");
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(ModelError::Config("init scale must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// `(input_dim, hidden_dim)` of every LSTM cell in parameter order.
    pub fn cell_shapes(&self) -> Vec<(usize, usize)> {
        let h = self.hidden;
        let letters_in = self.window * self.letter_embedding;
        let mut shapes = Vec::new();
        match self.architecture {
            Architecture::EncoderDecoder => {
                for k in 0..self.layers {
                    shapes.push((if k == 0 { self.letter_embedding } else { h }, h));
                }
                for k in 0..self.layers {
                    shapes.push((if k == 0 { self.phoneme_embedding } else { h }, h));
                }
            }
            Architecture::Unidirectional => {
                for k in 0..self.layers {
                    shapes.push((if k == 0 { letters_in + self.phoneme_embedding } else { h }, h));
                }
            }
            Architecture::Bidirectional => {
                for k in 0..self.layers {
                    shapes.push((if k == 0 { letters_in + self.phoneme_embedding } else { 2 * h }, h));
                }
                for k in 0..self.layers {
                    shapes.push((if k == 0 { letters_in } else { h }, h));
                }
                shapes.push((2 * h, h));
            }
        }
        shapes
    }

    /// Exact number of trainable scalars for the given vocabulary sizes.
    pub fn param_count(&self, letter_vocab: usize, phoneme_vocab: usize) -> usize {
        letter_vocab * self.letter_embedding
            + phoneme_vocab * self.phoneme_embedding
            + self.cell_shapes().iter().map(|&(i, h)| LstmCellParams::<f32>::param_count_for(i, h)).sum::<usize>()
            + phoneme_vocab * self.hidden
            + phoneme_vocab
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("symbol {0:?} is not in the vocabulary")]
    UnknownSymbol(String),
    #[error("example has {letters} letters but {outputs} output slots")]
    LengthMismatch { letters: usize, outputs: usize },
    #[error("empty word")]
    EmptyWord,
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Every trainable tensor of one model.
///
/// Tensor order, which the model file relies on: letter embeddings,
/// phoneme embeddings, each LSTM cell in [`ModelConfig::cell_shapes`] order
/// (input weights, recurrent weights, bias), output weights, output bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<R> {
    pub letter_embedding: Matrix<R>,
    pub phoneme_embedding: Matrix<R>,
    pub cells: Vec<LstmCellParams<R>>,
    pub output_weights: Matrix<R>,
    pub output_bias: Vec<R>,
}

impl<R: Real> ModelParams<R> {
    pub fn zeros(config: &ModelConfig, letter_vocab: usize, phoneme_vocab: usize) -> Result<Self, ModelError> {
        Ok(Self {
            letter_embedding: Matrix::zeros(letter_vocab, config.letter_embedding)?,
            phoneme_embedding: Matrix::zeros(phoneme_vocab, config.phoneme_embedding)?,
            cells: config
                .cell_shapes()
                .into_iter()
                .map(|(i, h)| LstmCellParams::zeros(i, h))
                .collect::<Result<_, _>>()?,
            output_weights: Matrix::zeros(phoneme_vocab, config.hidden)?,
            output_bias: alloc::vec![R::ZERO; phoneme_vocab],
        })
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill_zero();
        z
    }

    pub fn cast<S: Real>(&self) -> ModelParams<S> {
        ModelParams {
            letter_embedding: self.letter_embedding.cast(),
            phoneme_embedding: self.phoneme_embedding.cast(),
            cells: self.cells.iter().map(LstmCellParams::cast).collect(),
            output_weights: self.output_weights.cast(),
            output_bias: self.output_bias.iter().map(|v| S::from_f64(v.to_f64())).collect(),
        }
    }
}

impl<R: Real> Parameters<R> for ModelParams<R> {
    fn tensors(&self) -> Vec<&[R]> {
        let mut t = alloc::vec![self.letter_embedding.values(), self.phoneme_embedding.values()];
        for c in &self.cells {
            t.extend(c.tensors());
        }
        t.push(self.output_weights.values());
        t.push(&self.output_bias);
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [R]> {
        let mut t = alloc::vec![self.letter_embedding.values_mut(), self.phoneme_embedding.values_mut()];
        for c in &mut self.cells {
            t.extend(c.tensors_mut());
        }
        t.push(self.output_weights.values_mut());
        t.push(&mut self.output_bias);
        t
    }
}

/// A training or scoring example as symbol indices, without boundary symbols.
/// For alignment models `outputs` holds one slot symbol per letter; for the
/// encoder-decoder it is the phoneme sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub letters: Vec<usize>,
    pub outputs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct G2PModel<R> {
    config: ModelConfig,
    letters: SymbolTable,
    phonemes: SymbolTable,
    pub params: ModelParams<R>,
}

/// Builds a model with parameters drawn from the configured seed: uniform
/// weights on `[-init_scale, init_scale]` and zero biases.
pub fn build_model<R: Real>(
    config: ModelConfig,
    letters: SymbolTable,
    phonemes: SymbolTable,
) -> Result<G2PModel<R>, ModelError> {
    config.validate()?;
    let mut params = ModelParams::zeros(&config, letters.len(), phonemes.len())?;
    let mut rng = config.seed.rng();
    let scale = config.init_scale;
    params.letter_embedding.init_uniform(scale, &mut rng);
    params.phoneme_embedding.init_uniform(scale, &mut rng);
    for c in &mut params.cells {
        c.init_uniform(scale, &mut rng);
    }
    params.output_weights.init_uniform(scale, &mut rng);
    Ok(G2PModel { config, letters, phonemes, params })
}

impl<R: Real> G2PModel<R> {
    /// Assembles a model from existing parameters, checking every shape.
    pub fn from_parts(
        config: ModelConfig,
        letters: SymbolTable,
        phonemes: SymbolTable,
        params: ModelParams<R>,
    ) -> Result<Self, ModelError> {
        config.validate()?;
        let expected = ModelParams::<R>::zeros(&config, letters.len(), phonemes.len())?;
        let (a, b) = (expected.tensors(), params.tensors());
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.len() != y.len()) {
            return Err(ModelError::Config("parameter shapes do not match the configuration".into()));
        }
        Ok(Self { config, letters, phonemes, params })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn letters(&self) -> &SymbolTable {
        &self.letters
    }

    pub fn phonemes(&self) -> &SymbolTable {
        &self.phonemes
    }

    pub fn output_vocab(&self) -> usize {
        self.phonemes.len()
    }

    pub fn cast<S: Real>(&self) -> G2PModel<S> {
        G2PModel {
            config: self.config.clone(),
            letters: self.letters.clone(),
            phonemes: self.phonemes.clone(),
            params: self.params.cast(),
        }
    }

    pub fn encode_word(&self, word: &[char]) -> Result<Vec<usize>, ModelError> {
        if word.is_empty() {
            return Err(ModelError::EmptyWord);
        }
        word.iter()
            .map(|&c| self.letters.letter_index(c).ok_or_else(|| ModelError::UnknownSymbol(c.into())))
            .collect()
    }

    fn encode_phonemes<'a, I: IntoIterator<Item = &'a str>>(&self, symbols: I) -> Result<Vec<usize>, ModelError> {
        symbols
            .into_iter()
            .map(|s| self.phonemes.index_of(s).ok_or_else(|| ModelError::UnknownSymbol(s.into())))
            .collect()
    }

    /// Encodes an aligned pair for the alignment-based architectures.
    pub fn encode_aligned(&self, pair: &AlignedPair) -> Result<EncodedExample, ModelError> {
        let letters = self.encode_word(&pair.letters)?;
        let names: Vec<String> = pair.slots.iter().map(alloc::string::ToString::to_string).collect();
        let outputs = self.encode_phonemes(names.iter().map(String::as_str))?;
        if outputs.len() != letters.len() {
            return Err(ModelError::LengthMismatch { letters: letters.len(), outputs: outputs.len() });
        }
        Ok(EncodedExample { letters, outputs })
    }

    /// Encodes a raw (word, pronunciation) pair for the encoder-decoder.
    pub fn encode_pronunciation(&self, word: &[char], pronunciation: &[String]) -> Result<EncodedExample, ModelError> {
        Ok(EncodedExample {
            letters: self.encode_word(word)?,
            outputs: self.encode_phonemes(pronunciation.iter().map(String::as_str))?,
        })
    }

    /// The full target sequence scored for `example`, boundary symbols included.
    pub fn targets(&self, example: &EncodedExample) -> Result<Vec<usize>, ModelError> {
        let mut t = Vec::with_capacity(example.outputs.len() + 2);
        if self.config.architecture.uses_alignment() {
            if example.outputs.len() != example.letters.len() {
                return Err(ModelError::LengthMismatch {
                    letters: example.letters.len(),
                    outputs: example.outputs.len(),
                });
            }
            t.push(crate::lexicon::BOS);
        }
        t.extend_from_slice(&example.outputs);
        t.push(EOS);
        Ok(t)
    }
}
