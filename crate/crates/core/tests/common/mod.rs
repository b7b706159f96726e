#![allow(dead_code)]

use g2p_core::aligner::{path_log_prob, AlignedPair, ChunkProbTable, Slot, DEFAULT_FLOOR};
use g2p_core::decoder::{Horizon, SearchSpace};
use g2p_core::lexicon::{SymbolKind, SymbolTable, EOS};
use g2p_core::model::{build_model, Architecture, EncodedExample, G2PModel, ModelConfig};
use g2p_core::nn::{grad_check, Parameters, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn letters() -> SymbolTable {
    SymbolTable::new(SymbolKind::Letter, ["A", "B", "C"])
}

/// Phonemes plus a couple of compounds, so alignment outputs are realistic.
pub fn phonemes() -> SymbolTable {
    SymbolTable::new(SymbolKind::Phoneme, ["K", "AE", "T", "K:S"])
}

pub fn toy_config(arch: Architecture, layers: usize, window: usize, scale: f64, seed: u64) -> ModelConfig {
    ModelConfig {
        architecture: arch,
        letter_embedding: 3,
        phoneme_embedding: 2,
        hidden: 4,
        layers,
        window,
        seed: RngSeed(seed),
        init_scale: scale,
    }
}

pub fn toy_model(config: ModelConfig) -> G2PModel<f64> {
    build_model(config, letters(), phonemes()).unwrap()
}

/// A random example valid for `model`; alignment models get one output per
/// letter, the encoder-decoder a free-length sequence.
pub fn random_example(model: &G2PModel<f64>, rng: &mut ChaCha8Rng, len: usize) -> EncodedExample {
    let nl = model.letters().len();
    let np = model.phonemes().len();
    let letters: Vec<usize> = (0..len).map(|_| rng.random_range(2..nl)).collect();
    let outputs = if model.config().architecture.uses_alignment() {
        (0..len).map(|_| rng.random_range(2..np)).collect()
    } else {
        let n = rng.random_range(1..=len + 1);
        (0..n).map(|_| rng.random_range(3..np)).collect()
    };
    EncodedExample { letters, outputs }
}

/// Max relative error of the analytic gradient of the summed loss over
/// `examples`.
pub fn model_grad_error(model: &G2PModel<f64>, examples: &[EncodedExample]) -> f64 {
    let mut grads = model.params.zeros_like();
    for ex in examples {
        model.loss_and_grad(ex, &mut grads).unwrap();
    }
    let mut probe = model.clone();
    grad_check(
        |p| {
            probe.params.clone_from(p);
            examples.iter().map(|ex| probe.loss(ex).unwrap().0).sum()
        },
        &model.params,
        &grads,
        GRAD_EPSILON,
    )
}

pub const GRAD_EPSILON: f64 = 1e-4;

/// Largest amount by which any gradient entry misses
/// `|a - n| <= rtol * max(|a|, |n|) + atol`; zero or less means all agree.
pub fn model_grad_excess(model: &G2PModel<f64>, examples: &[EncodedExample], rtol: f64, atol: f64) -> f64 {
    let mut grads = model.params.zeros_like();
    for ex in examples {
        model.loss_and_grad(ex, &mut grads).unwrap();
    }
    let mut probe = model.clone();
    let mut worst = f64::NEG_INFINITY;
    let loss = |m: &G2PModel<f64>| examples.iter().map(|ex| m.loss(ex).unwrap().0).sum::<f64>();
    for (t, g) in grads.tensors().iter().enumerate() {
        for (j, &a) in g.iter().enumerate() {
            let orig = probe.params.tensors()[t][j];
            probe.params.tensors_mut()[t][j] = orig + GRAD_EPSILON;
            let up = loss(&probe);
            probe.params.tensors_mut()[t][j] = orig - GRAD_EPSILON;
            let down = loss(&probe);
            probe.params.tensors_mut()[t][j] = orig;
            let n = (up - down) / (2.0 * GRAD_EPSILON);
            worst = worst.max((a - n).abs() - rtol * a.abs().max(n.abs()) - atol);
        }
    }
    worst
}

pub fn grad_cases() -> Vec<(&'static str, ModelConfig)> {
    vec![
        ("encdec 1 layer", toy_config(Architecture::EncoderDecoder, 1, 1, 1.0, 11)),
        ("encdec 2 layers", toy_config(Architecture::EncoderDecoder, 2, 1, 1.0, 12)),
        ("uni window 1", toy_config(Architecture::Unidirectional, 1, 1, 1.0, 13)),
        ("uni window 3", toy_config(Architecture::Unidirectional, 1, 3, 1.0, 14)),
        ("uni 2 layers window 3", toy_config(Architecture::Unidirectional, 2, 3, 1.0, 15)),
        ("bi 1 layer", toy_config(Architecture::Bidirectional, 1, 3, 1.0, 16)),
        ("bi 2 layers", toy_config(Architecture::Bidirectional, 2, 3, 1.0, 17)),
    ]
}

pub fn grad_error_for(config: &ModelConfig) -> f64 {
    let model = toy_model(config.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.0 ^ 0xA5);
    let examples: Vec<_> = [3, 1].iter().map(|&n| random_example(&model, &mut rng, n)).collect();
    model_grad_error(&model, &examples)
}

/// Sum of all parameter entries, used to check a tensor never moved.
pub fn tensor_sum(p: &impl Parameters<f64>) -> f64 {
    p.tensors().iter().flat_map(|t| t.iter()).sum()
}

/// Every monotone alignment of `word` to `pron` with 0-2 phonemes per letter.
pub fn all_alignments(word: &[char], pron: &[String]) -> Vec<AlignedPair> {
    fn go(word: &[char], pron: &[String], slots: &mut Vec<Slot>, out: &mut Vec<Vec<Slot>>) {
        if word.is_empty() {
            if pron.is_empty() {
                out.push(slots.clone());
            }
            return;
        }
        for take in 0..=2.min(pron.len()) {
            slots.push(match take {
                0 => Slot::Null,
                1 => Slot::Single(pron[0].clone()),
                _ => Slot::Compound(pron[0].clone(), pron[1].clone()),
            });
            go(&word[1..], &pron[take..], slots, out);
            slots.pop();
        }
    }
    let mut out = Vec::new();
    go(word, pron, &mut Vec::new(), &mut out);
    out.into_iter().map(|s| AlignedPair::new(word.to_vec(), s).unwrap()).collect()
}

/// Best path log-probability by exhaustive enumeration.
pub fn brute_force_best(word: &[char], pron: &[String], table: &ChunkProbTable) -> Option<f64> {
    all_alignments(word, pron)
        .iter()
        .map(|a| path_log_prob(a, table, DEFAULT_FLOOR))
        .fold(None, |best, s| Some(best.map_or(s, |b: f64| b.max(s))))
}

/// Naive recursive Levenshtein distance.
pub fn recursive_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    match (a, b) {
        ([], _) => b.len(),
        (_, []) => a.len(),
        ([x, ra @ ..], [y, rb @ ..]) => {
            let sub = recursive_edit_distance(ra, rb) + usize::from(x != y);
            let del = recursive_edit_distance(ra, b) + 1;
            let ins = recursive_edit_distance(a, rb) + 1;
            sub.min(del).min(ins)
        }
    }
}

/// A search space whose distribution at each step is an arbitrary function
/// of the whole prefix, drawn once up front.
pub struct PrefixTable {
    pub vocab: usize,
    pub steps: usize,
    /// Indexed by prefix encoded in base `vocab` with a leading 1.
    pub logp: std::collections::HashMap<u64, Vec<f64>>,
}

impl PrefixTable {
    pub fn random(vocab: usize, steps: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut logp = std::collections::HashMap::new();
        let mut frontier = vec![1u64];
        for _ in 0..steps {
            let mut next = Vec::new();
            for key in frontier {
                let w: Vec<f64> = (0..vocab).map(|_| rng.random::<f64>() + 1e-3).collect();
                let z: f64 = w.iter().sum();
                logp.insert(key, w.iter().map(|x| (x / z).ln()).collect());
                next.extend((0..vocab as u64).map(|v| key * vocab as u64 + v));
            }
            frontier = next;
        }
        Self { vocab, steps, logp }
    }

    pub fn score(&self, seq: &[usize]) -> f64 {
        let mut key = 1u64;
        let mut total = 0.0;
        for &s in seq {
            total += self.logp[&key][s];
            key = key * self.vocab as u64 + s as u64;
        }
        total
    }

    /// Exhaustive argmax; ties go to the lexicographically smaller sequence.
    pub fn exhaustive_best(&self) -> (Vec<usize>, f64) {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for code in 0..self.vocab.pow(self.steps as u32) {
            let mut seq = vec![0; self.steps];
            let mut c = code;
            for i in (0..self.steps).rev() {
                seq[i] = c % self.vocab;
                c /= self.vocab;
            }
            let s = self.score(&seq);
            if best.as_ref().is_none_or(|(_, b)| s > *b) {
                best = Some((seq, s));
            }
        }
        best.unwrap()
    }
}

impl SearchSpace for PrefixTable {
    type State = u64;

    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn initial_state(&self) -> u64 {
        1
    }

    fn step(&self, state: &u64, position: usize, prev: usize) -> (Vec<f64>, u64) {
        let key = if position == 0 { 1 } else { state * self.vocab as u64 + prev as u64 };
        (self.logp[&key].clone(), key)
    }

    fn horizon(&self) -> Horizon {
        Horizon::Fixed(self.steps)
    }
}

/// Every output sequence a search over `model` for `letters` could return,
/// with its log-likelihood.
pub fn enumerate_model_outputs(model: &G2PModel<f64>, letters: &[usize], max_len: usize) -> Vec<(Vec<usize>, f64)> {
    let v = model.output_vocab();
    let mut out = Vec::new();
    if model.config().architecture.uses_alignment() {
        let n = letters.len() + 2;
        for code in 0..v.pow(n as u32) {
            let mut seq = vec![0; n];
            let mut c = code;
            for i in (0..n).rev() {
                seq[i] = c % v;
                c /= v;
            }
            out.push((seq.clone(), model.score_sequence(letters, &seq).unwrap()));
        }
    } else {
        for len in 1..=max_len {
            for code in 0..v.pow(len as u32) {
                let mut seq = vec![0; len];
                let mut c = code;
                for i in (0..len).rev() {
                    seq[i] = c % v;
                    c /= v;
                }
                if seq[..len - 1].contains(&EOS) || seq[len - 1] != EOS {
                    continue;
                }
                out.push((seq.clone(), model.score_sequence(letters, &seq).unwrap()));
            }
        }
    }
    out
}
