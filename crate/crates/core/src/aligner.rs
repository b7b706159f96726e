//! Monotone letter-to-phoneme alignment.
//!
//! Every letter takes exactly one slot holding zero phonemes (null), one
//! phoneme, or two phonemes (a compound, written `AH:L`). Chunk probabilities
//! `p(slot | letter)` are trained with EM over the alignment lattice whose
//! nodes are `(letters consumed, phonemes consumed)` and whose edges consume
//! one letter and 0, 1 or 2 phonemes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::lexicon::{LexiconEntry, SymbolTable, COMPOUND_SEP, PHONE_NULL};

/// Probability floor added to every chunk at Viterbi time.
pub const DEFAULT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignError {
    #[error("no feasible (word, pronunciation) pairs to train on")]
    EmptyCorpus,
    #[error("no alignment of {word} to [{pronunciation}]")]
    AlignmentFailure { word: String, pronunciation: String },
    #[error("invalid slot {0:?}")]
    InvalidSlot(String),
    #[error("invalid probability for {letter}/{slot}: {value}")]
    InvalidProbability { letter: char, slot: String, value: String },
}

/// The phonemes one letter aligns to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Null,
    Single(String),
    Compound(String, String),
}

impl Slot {
    pub fn phonemes(&self) -> Vec<&str> {
        match self {
            Slot::Null => vec![],
            Slot::Single(a) => vec![a.as_str()],
            Slot::Compound(a, b) => vec![a.as_str(), b.as_str()],
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Slot::Null => 0,
            Slot::Single(_) => 1,
            Slot::Compound(..) => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Slot::Null)
    }

    fn from_phonemes(ph: &[String]) -> Slot {
        match ph {
            [] => Slot::Null,
            [a] => Slot::Single(a.clone()),
            [a, b] => Slot::Compound(a.clone(), b.clone()),
            _ => unreachable!("slots hold at most two phonemes"),
        }
    }

    /// Parses the output-symbol spelling produced by `Display`.
    pub fn parse(s: &str) -> Result<Slot, AlignError> {
        if s == PHONE_NULL {
            return Ok(Slot::Null);
        }
        let bad = || AlignError::InvalidSlot(s.to_string());
        if s.is_empty() || s.chars().any(char::is_whitespace) {
            return Err(bad());
        }
        match s.split_once(COMPOUND_SEP) {
            None => Ok(Slot::Single(s.to_string())),
            Some((a, b)) if !a.is_empty() && !b.is_empty() && !b.contains(COMPOUND_SEP) => {
                Ok(Slot::Compound(a.to_string(), b.to_string()))
            }
            Some(_) => Err(bad()),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Null => f.write_str(PHONE_NULL),
            Slot::Single(a) => f.write_str(a),
            Slot::Compound(a, b) => write!(f, "{a}{COMPOUND_SEP}{b}"),
        }
    }
}

/// Letters paired one-to-one with slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPair {
    pub letters: Vec<char>,
    pub slots: Vec<Slot>,
}

impl AlignedPair {
    pub fn new(letters: Vec<char>, slots: Vec<Slot>) -> Result<Self, AlignError> {
        if letters.len() != slots.len() || letters.is_empty() {
            return Err(AlignError::InvalidSlot(format!(
                "{} letters against {} slots",
                letters.len(),
                slots.len()
            )));
        }
        Ok(Self { letters, slots })
    }

    pub fn word(&self) -> String {
        self.letters.iter().collect()
    }

    /// The pronunciation obtained by concatenating the slots.
    pub fn pronunciation(&self) -> Vec<String> {
        self.slots.iter().flat_map(|s| s.phonemes()).map(str::to_string).collect()
    }

    pub fn reconstructs(&self, pronunciation: &[String]) -> bool {
        self.letters.len() == self.slots.len() && self.pronunciation() == pronunciation
    }
}

/// `p(slot | letter)` over a fixed letter and phoneme inventory, stored densely.
/// Slot ids: null is 0, single `a` is `1 + a`, compound `(a, b)` is
/// `1 + P + a·P + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkProbTable {
    letters: Vec<char>,
    letter_index: BTreeMap<char, usize>,
    phonemes: Vec<String>,
    phone_index: BTreeMap<String, usize>,
    probs: Vec<f64>,
}

impl ChunkProbTable {
    fn empty(letters: BTreeSet<char>, phonemes: BTreeSet<String>) -> Self {
        let letters: Vec<char> = letters.into_iter().collect();
        let phonemes: Vec<String> = phonemes.into_iter().collect();
        let letter_index = letters.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let phone_index = phonemes.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let n = 1 + phonemes.len() + phonemes.len() * phonemes.len();
        Self { probs: vec![0.0; letters.len() * n], letters, letter_index, phonemes, phone_index }
    }

    fn chunk_count(&self) -> usize {
        let p = self.phonemes.len();
        1 + p + p * p
    }

    fn chunk_id(&self, slot: &Slot) -> Option<usize> {
        let p = self.phonemes.len();
        match slot {
            Slot::Null => Some(0),
            Slot::Single(a) => self.phone_index.get(a).map(|&a| 1 + a),
            Slot::Compound(a, b) => {
                let (a, b) = (self.phone_index.get(a)?, self.phone_index.get(b)?);
                Some(1 + p + a * p + b)
            }
        }
    }

    fn chunk_slot(&self, id: usize) -> Slot {
        let p = self.phonemes.len();
        if id == 0 {
            Slot::Null
        } else if id <= p {
            Slot::Single(self.phonemes[id - 1].clone())
        } else {
            let r = id - 1 - p;
            Slot::Compound(self.phonemes[r / p].clone(), self.phonemes[r % p].clone())
        }
    }

    /// Builds a table from unnormalized weights; each letter's row is scaled to
    /// sum to one.
    pub fn from_weights<I>(weights: I) -> Result<Self, AlignError>
    where
        I: IntoIterator<Item = (char, Slot, f64)>,
    {
        let weights: Vec<(char, Slot, f64)> = weights.into_iter().collect();
        for (letter, slot, w) in &weights {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(AlignError::InvalidProbability {
                    letter: *letter,
                    slot: slot.to_string(),
                    value: format!("{w}"),
                });
            }
        }
        let letters = weights.iter().map(|(l, _, _)| *l).collect();
        let phonemes = weights.iter().flat_map(|(_, s, _)| s.phonemes()).map(str::to_string).collect();
        let mut table = Self::empty(letters, phonemes);
        let n = table.chunk_count();
        for (letter, slot, w) in &weights {
            let row = table.letter_index[letter];
            let id = table.chunk_id(slot).expect("phoneme registered above");
            table.probs[row * n + id] += *w;
        }
        table.normalize_rows();
        Ok(table)
    }

    fn normalize_rows(&mut self) {
        let n = self.chunk_count();
        for row in self.probs.chunks_exact_mut(n) {
            let sum: f64 = row.iter().sum();
            if sum > 0.0 {
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
    }

    /// `p(slot | letter)`; zero for letters or phonemes outside the table.
    pub fn prob(&self, letter: char, slot: &Slot) -> f64 {
        match (self.letter_index.get(&letter), self.chunk_id(slot)) {
            (Some(&row), Some(id)) => self.probs[row * self.chunk_count() + id],
            _ => 0.0,
        }
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn phonemes(&self) -> &[String] {
        &self.phonemes
    }

    pub fn row_sum(&self, letter: char) -> f64 {
        match self.letter_index.get(&letter) {
            Some(&row) => {
                let n = self.chunk_count();
                self.probs[row * n..(row + 1) * n].iter().sum()
            }
            None => 0.0,
        }
    }

    /// All nonzero entries, letters and slot ids ascending.
    pub fn entries(&self) -> Vec<(char, Slot, f64)> {
        let n = self.chunk_count();
        let mut out = Vec::new();
        for (row, &letter) in self.letters.iter().enumerate() {
            for id in 0..n {
                let p = self.probs[row * n + id];
                if p > 0.0 {
                    out.push((letter, self.chunk_slot(id), p));
                }
            }
        }
        out
    }
}

/// A training pair mapped onto table indices.
struct EncodedPair {
    letters: Vec<usize>,
    phones: Vec<usize>,
}

fn feasible(letters: usize, phones: usize) -> bool {
    letters > 0 && phones <= 2 * letters
}

/// Edge `(i-1, j-k) -> (i, j)` for letter `i-1` taking `k` phonemes.
#[inline]
fn edge_chunk(table_p: usize, phones: &[usize], j: usize, k: usize) -> usize {
    match k {
        0 => 0,
        1 => 1 + phones[j - 1],
        _ => 1 + table_p + phones[j - 2] * table_p + phones[j - 1],
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmOutcome {
    pub table: ChunkProbTable,
    /// Corpus log-likelihood of the initial table and of each update.
    pub log_likelihoods: Vec<f64>,
    /// `(word, pronunciation)` pairs excluded because `|P| > 2|L|`.
    pub skipped: Vec<(String, Vec<String>)>,
}

/// Trains `p(slot | letter)` with EM over every `(word, pronunciation)` pair.
///
/// The table starts uniform over the chunks that lie on at least one complete
/// lattice path. Training runs at most `max_iters` updates and stops early when
/// the corpus log-likelihood gains less than `tol`.
pub fn em_train_aligner(entries: &[LexiconEntry], max_iters: usize, tol: f64) -> Result<EmOutcome, AlignError> {
    let mut skipped = Vec::new();
    let mut kept: Vec<(&[char], &[String])> = Vec::new();
    for e in entries {
        for p in &e.pronunciations {
            if feasible(e.word.len(), p.len()) {
                kept.push((&e.word, p));
            } else {
                skipped.push((e.word_string(), p.clone()));
            }
        }
    }
    if kept.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    let letters = kept.iter().flat_map(|(w, _)| w.iter().copied()).collect();
    let phonemes = kept.iter().flat_map(|(_, p)| p.iter().cloned()).collect();
    let mut table = ChunkProbTable::empty(letters, phonemes);
    let pairs: Vec<EncodedPair> = kept
        .iter()
        .map(|(w, p)| EncodedPair {
            letters: w.iter().map(|c| table.letter_index[c]).collect(),
            phones: p.iter().map(|ph| table.phone_index[ph]).collect(),
        })
        .collect();

    initialize_uniform_over_support(&mut table, &pairs);

    let mut log_likelihoods = Vec::new();
    let mut counts = vec![0.0; table.probs.len()];
    let mut iter = 0;
    loop {
        counts.iter_mut().for_each(|c| *c = 0.0);
        let ll = expectation(&table, &pairs, &mut counts);
        let converged = log_likelihoods.last().is_some_and(|&prev: &f64| ll - prev < tol);
        log_likelihoods.push(ll);
        if converged || iter == max_iters {
            break;
        }
        let n = table.chunk_count();
        for (row, crow) in table.probs.chunks_exact_mut(n).zip(counts.chunks_exact(n)) {
            let total: f64 = crow.iter().sum();
            if total > 0.0 {
                for (p, c) in row.iter_mut().zip(crow) {
                    *p = c / total;
                }
            }
        }
        iter += 1;
    }
    Ok(EmOutcome { table, log_likelihoods, skipped })
}

fn initialize_uniform_over_support(table: &mut ChunkProbTable, pairs: &[EncodedPair]) {
    let n = table.chunk_count();
    let p = table.phonemes.len();
    for pair in pairs {
        let (t, m) = (pair.letters.len(), pair.phones.len());
        let w = m + 1;
        let mut fwd = vec![false; (t + 1) * w];
        let mut bwd = vec![false; (t + 1) * w];
        fwd[0] = true;
        for i in 1..=t {
            for j in 0..=m {
                fwd[i * w + j] = (0..=2.min(j)).any(|k| fwd[(i - 1) * w + j - k]);
            }
        }
        bwd[t * w + m] = true;
        for i in (0..t).rev() {
            for j in 0..=m {
                bwd[i * w + j] = (0..=2).any(|k| j + k <= m && bwd[(i + 1) * w + j + k]);
            }
        }
        for i in 1..=t {
            for j in 0..=m {
                for k in 0..=2.min(j) {
                    if fwd[(i - 1) * w + j - k] && bwd[i * w + j] {
                        let id = edge_chunk(p, &pair.phones, j, k);
                        table.probs[pair.letters[i - 1] * n + id] = 1.0;
                    }
                }
            }
        }
    }
    table.normalize_rows();
}

/// Forward-backward over every pair; adds expected chunk counts into
/// `counts` and returns the corpus log-likelihood.
fn expectation(table: &ChunkProbTable, pairs: &[EncodedPair], counts: &mut [f64]) -> f64 {
    let n = table.chunk_count();
    let p = table.phonemes.len();
    let log_probs: Vec<f64> =
        table.probs.iter().map(|&v| if v > 0.0 { libm::log(v) } else { f64::NEG_INFINITY }).collect();
    let mut total = 0.0;
    for pair in pairs {
        let (t, m) = (pair.letters.len(), pair.phones.len());
        let w = m + 1;
        let lp = |i: usize, j: usize, k: usize| log_probs[pair.letters[i - 1] * n + edge_chunk(p, &pair.phones, j, k)];
        let mut alpha = vec![f64::NEG_INFINITY; (t + 1) * w];
        let mut beta = vec![f64::NEG_INFINITY; (t + 1) * w];
        alpha[0] = 0.0;
        for i in 1..=t {
            for j in 0..=m {
                let mut acc = f64::NEG_INFINITY;
                for k in 0..=2.min(j) {
                    acc = log_add(acc, alpha[(i - 1) * w + j - k] + lp(i, j, k));
                }
                alpha[i * w + j] = acc;
            }
        }
        beta[t * w + m] = 0.0;
        for i in (0..t).rev() {
            for j in 0..=m {
                let mut acc = f64::NEG_INFINITY;
                for k in 0..=2 {
                    if j + k <= m {
                        acc = log_add(acc, lp(i + 1, j + k, k) + beta[(i + 1) * w + j + k]);
                    }
                }
                beta[i * w + j] = acc;
            }
        }
        let z = alpha[t * w + m];
        if z == f64::NEG_INFINITY {
            continue;
        }
        total += z;
        for i in 1..=t {
            for j in 0..=m {
                for k in 0..=2.min(j) {
                    let post = alpha[(i - 1) * w + j - k] + lp(i, j, k) + beta[i * w + j] - z;
                    if post > f64::NEG_INFINITY {
                        counts[pair.letters[i - 1] * n + edge_chunk(p, &pair.phones, j, k)] += libm::exp(post);
                    }
                }
            }
        }
    }
    total
}

/// Log-probability of one alignment under `table` with `floor` added to every
/// chunk probability.
pub fn path_log_prob(pair: &AlignedPair, table: &ChunkProbTable, floor: f64) -> f64 {
    pair.letters.iter().zip(&pair.slots).map(|(&l, s)| libm::log(table.prob(l, s) + floor)).sum()
}

/// Most probable alignment, with [`DEFAULT_FLOOR`] smoothing.
pub fn viterbi_align(word: &[char], pronunciation: &[String], table: &ChunkProbTable) -> Result<AlignedPair, AlignError> {
    viterbi_align_with_floor(word, pronunciation, table, Some(DEFAULT_FLOOR))
}

/// Most probable alignment. Equal scores prefer a single phoneme, then a
/// compound, then null for the later letter.
pub fn viterbi_align_with_floor(
    word: &[char],
    pronunciation: &[String],
    table: &ChunkProbTable,
    floor: Option<f64>,
) -> Result<AlignedPair, AlignError> {
    let failure = || AlignError::AlignmentFailure {
        word: word.iter().collect(),
        pronunciation: pronunciation.join(" "),
    };
    let (t, m) = (word.len(), pronunciation.len());
    if !feasible(t, m) {
        return Err(failure());
    }
    let floor = floor.unwrap_or(0.0);
    let w = m + 1;
    let mut score = vec![f64::NEG_INFINITY; (t + 1) * w];
    let mut back = vec![u8::MAX; (t + 1) * w];
    score[0] = 0.0;
    for i in 1..=t {
        for j in 0..=m {
            for k in [1usize, 2, 0] {
                if k > j {
                    continue;
                }
                let prev = score[(i - 1) * w + j - k];
                if prev == f64::NEG_INFINITY {
                    continue;
                }
                let p = table.prob(word[i - 1], &Slot::from_phonemes(&pronunciation[j - k..j])) + floor;
                if p <= 0.0 {
                    continue;
                }
                let s = prev + libm::log(p);
                if s > score[i * w + j] {
                    score[i * w + j] = s;
                    back[i * w + j] = k as u8;
                }
            }
        }
    }
    if score[t * w + m] == f64::NEG_INFINITY {
        return Err(failure());
    }
    let mut slots = Vec::with_capacity(t);
    let mut j = m;
    for i in (1..=t).rev() {
        let k = back[i * w + j] as usize;
        slots.push(Slot::from_phonemes(&pronunciation[j - k..j]));
        j -= k;
    }
    slots.reverse();
    Ok(AlignedPair { letters: word.to_vec(), slots })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignReport {
    pub failures: Vec<AlignError>,
    /// Compound symbols newly added to the phoneme table.
    pub added_compounds: Vec<String>,
}

/// Aligns every `(word, pronunciation)` pair and registers each compound
/// slot in `phonemes` as an output symbol.
pub fn align_corpus(
    entries: &[LexiconEntry],
    table: &ChunkProbTable,
    phonemes: &mut SymbolTable,
) -> (Vec<AlignedPair>, AlignReport) {
    let mut aligned = Vec::new();
    let mut report = AlignReport::default();
    for e in entries {
        for p in &e.pronunciations {
            match viterbi_align(&e.word, p, table) {
                Ok(pair) => aligned.push(pair),
                Err(err) => report.failures.push(err),
            }
        }
    }
    let compounds: BTreeSet<String> = aligned
        .iter()
        .flat_map(|a| a.slots.iter())
        .filter(|s| matches!(s, Slot::Compound(..)))
        .map(|s| s.to_string())
        .filter(|s| phonemes.index_of(s).is_none())
        .collect();
    phonemes.extend(compounds.iter().cloned());
    report.added_compounds = compounds.into_iter().collect();
    (aligned, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{LexiconEntry, SymbolKind};

    fn s(x: &str) -> String {
        x.to_string()
    }

    fn entry(word: &str, pron: &str) -> LexiconEntry {
        LexiconEntry::new(word, vec![pron.split_whitespace().map(s).collect()])
    }

    #[test]
    fn slot_spelling_round_trips() {
        for slot in [Slot::Null, Slot::Single(s("AE")), Slot::Compound(s("AH"), s("L"))] {
            assert_eq!(Slot::parse(&slot.to_string()).unwrap(), slot);
        }
        assert!(Slot::parse("A:B:C").is_err());
        assert!(Slot::parse(":B").is_err());
    }

    #[test]
    fn single_pair_is_certain() {
        let out = em_train_aligner(&[entry("A", "x")], 10, 1e-12).unwrap();
        assert_eq!(out.table.prob('A', &Slot::Single(s("x"))), 1.0);
        assert_eq!(out.log_likelihoods[0], 0.0);
        assert_eq!(out.table.entries().len(), 1);
    }

    #[test]
    fn two_letter_lattice_has_three_paths() {
        let out = em_train_aligner(&[entry("AB", "x y")], 20, 1e-12).unwrap();
        let t = &out.table;
        let third = 1.0 / 3.0;
        assert!((t.prob('A', &Slot::Single(s("x"))) - third).abs() < 1e-12);
        assert!((t.prob('A', &Slot::Compound(s("x"), s("y"))) - third).abs() < 1e-12);
        assert!((t.prob('A', &Slot::Null) - third).abs() < 1e-12);
        assert!((t.prob('B', &Slot::Single(s("y"))) - third).abs() < 1e-12);
        assert_eq!(t.entries().len(), 6);
        assert!((out.log_likelihoods[0] - (3.0f64 / 9.0).ln()).abs() < 1e-12);
        for w in out.log_likelihoods.windows(2) {
            assert!(w[1] >= w[0] - 1e-9);
        }
    }

    #[test]
    fn maximal_compounds_have_one_path() {
        let out = em_train_aligner(&[entry("AB", "w x y z")], 5, 1e-12).unwrap();
        assert_eq!(out.table.prob('A', &Slot::Compound(s("w"), s("x"))), 1.0);
        assert_eq!(out.table.prob('B', &Slot::Compound(s("y"), s("z"))), 1.0);
        assert_eq!(out.log_likelihoods, vec![0.0, 0.0]);
    }

    #[test]
    fn infeasible_pairs_are_skipped() {
        let out = em_train_aligner(&[entry("A", "x y z"), entry("B", "y")], 5, 1e-9).unwrap();
        assert_eq!(out.skipped, vec![(s("A"), vec![s("x"), s("y"), s("z")])]);
        assert_eq!(em_train_aligner(&[entry("A", "x y z")], 5, 1e-9).unwrap_err(), AlignError::EmptyCorpus);
    }

    fn tangle_table() -> ChunkProbTable {
        ChunkProbTable::from_weights([
            ('T', Slot::Single(s("T")), 1.0),
            ('A', Slot::Single(s("AE")), 1.0),
            ('N', Slot::Single(s("NG")), 1.0),
            ('G', Slot::Single(s("G")), 1.0),
            ('L', Slot::Compound(s("AH"), s("L")), 0.9),
            ('L', Slot::Single(s("L")), 0.1),
            ('E', Slot::Null, 0.9),
            ('E', Slot::Single(s("IY")), 0.1),
        ])
        .unwrap()
    }

    #[test]
    fn tangle_alignment() {
        let word: Vec<char> = "TANGLE".chars().collect();
        let pron: Vec<String> = "T AE NG G AH L".split(' ').map(s).collect();
        let pair = viterbi_align(&word, &pron, &tangle_table()).unwrap();
        let shown: Vec<String> = pair.slots.iter().map(|x| x.to_string()).collect();
        assert_eq!(shown, ["T", "AE", "NG", "G", "AH:L", "∅"]);
        assert!(pair.reconstructs(&pron));
    }

    #[test]
    fn tangle_adds_one_compound() {
        let e = entry("TANGLE", "T AE NG G AH L");
        let mut phones = SymbolTable::new(SymbolKind::Phoneme, ["AE", "AH", "G", "L", "NG", "T"]);
        let before = phones.len();
        let (aligned, report) = align_corpus(&[e], &tangle_table(), &mut phones);
        assert_eq!(aligned.len(), 1);
        assert_eq!(report.added_compounds, vec![s("AH:L")]);
        assert_eq!(phones.len(), before + 1);
        assert_eq!(phones.index_of("AH:L"), Some(before));
    }

    #[test]
    fn single_letter_single_phoneme_ignores_table() {
        let table = ChunkProbTable::from_weights([('Q', Slot::Null, 1.0)]).unwrap();
        let pair = viterbi_align(&['Z'], &[s("k")], &table).unwrap();
        assert_eq!(pair.slots, vec![Slot::Single(s("k"))]);
    }

    #[test]
    fn too_many_phonemes_fail() {
        let err = viterbi_align(&['A'], &[s("x"), s("y"), s("z")], &tangle_table()).unwrap_err();
        assert!(matches!(err, AlignError::AlignmentFailure { .. }));
    }

    #[test]
    fn no_floor_and_zero_mass_fails() {
        let table = ChunkProbTable::from_weights([('A', Slot::Null, 1.0)]).unwrap();
        assert!(viterbi_align_with_floor(&['A'], &[s("x")], &table, None).is_err());
        assert!(viterbi_align_with_floor(&['A'], &[s("x")], &table, Some(DEFAULT_FLOOR)).is_ok());
    }

    #[test]
    fn one_to_one_corpus_without_nulls() {
        let table = ChunkProbTable::from_weights([
            ('C', Slot::Single(s("K")), 1.0),
            ('A', Slot::Single(s("AE")), 1.0),
            ('T', Slot::Single(s("T")), 1.0),
        ])
        .unwrap();
        let mut phones = SymbolTable::new(SymbolKind::Phoneme, ["AE", "K", "T"]);
        let (aligned, report) = align_corpus(&[entry("CAT", "K AE T"), entry("TAT", "T AE T")], &table, &mut phones);
        assert!(report.failures.is_empty());
        assert!(aligned.iter().all(|a| a.slots.iter().all(|x| matches!(x, Slot::Single(_)))));
        let (aligned, report) = align_corpus(&[], &table, &mut phones);
        assert!(aligned.is_empty() && report == AlignReport::default());
    }
}
