//! Pronunciation lexicons, symbol tables and dataset partitions.
//!
//! Two text formats are understood:
//!
//! - CMUDict: `WORD  PH PH ...`, with `WORD(2)` marking further variants and
//!   `;;;` comment lines. A trailing ` # ...` on an entry is ignored.
//! - Tabular: `word<TAB>PH PH ...`, one variant per line. This is also the
//!   canonical serialization.
//!
//! Words are uppercased. Lexicons are parsed from strings; reading files is
//! left to the caller.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

pub const BOS: usize = 0;
pub const EOS: usize = 1;
pub const NULL: usize = 2;

pub const LETTER_BOS: &str = "<s>";
pub const LETTER_EOS: &str = "</s>";
pub const PHONE_BOS: &str = "<os>";
pub const PHONE_EOS: &str = "</os>";
pub const PHONE_NULL: &str = "∅";
/// Joins the two phonemes of a compound symbol, e.g. `AH:L`.
pub const COMPOUND_SEP: char = ':';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: empty pronunciation for {word}")]
    EmptyPronunciation { line: usize, word: String },
    #[error("no lexicon entries")]
    Empty,
    #[error("word {word} is listed in both the {first} and {second} partitions")]
    PartitionConflict { word: String, first: Partition, second: Partition },
    #[error("invalid symbol table: {0}")]
    InvalidTable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LexiconFormat {
    CmuDict,
    Tabular,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub word: Vec<char>,
    pub pronunciations: Vec<Vec<String>>,
}

impl LexiconEntry {
    pub fn new(word: &str, pronunciations: Vec<Vec<String>>) -> Self {
        Self { word: word.chars().flat_map(char::to_uppercase).collect(), pronunciations }
    }

    pub fn word_string(&self) -> String {
        self.word.iter().collect()
    }

    /// Adds a variant unless it is already present.
    pub fn add_pronunciation(&mut self, pron: Vec<String>) {
        if !self.pronunciations.contains(&pron) {
            self.pronunciations.push(pron);
        }
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse { line, message: message.into() }
}

fn strip_variant_marker(head: &str, line: usize) -> Result<&str, LexiconError> {
    match head.find('(') {
        None => Ok(head),
        Some(0) => Ok(head),
        Some(pos) => {
            let marker = &head[pos..];
            let digits = marker.strip_prefix('(').and_then(|m| m.strip_suffix(')'));
            match digits {
                Some(d) if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) => Ok(&head[..pos]),
                _ => Err(parse_error(line, format!("malformed variant marker in {head:?}"))),
            }
        }
    }
}

fn clean_phoneme(token: &str, strip_stress: bool, line: usize) -> Result<String, LexiconError> {
    let ph = if strip_stress { token.trim_end_matches(|c: char| c.is_ascii_digit()) } else { token };
    if ph.is_empty() {
        return Err(parse_error(line, format!("phoneme {token:?} is empty after stress stripping")));
    }
    if ph.contains(COMPOUND_SEP) || ph == PHONE_NULL || ph == PHONE_BOS || ph == PHONE_EOS {
        return Err(parse_error(line, format!("reserved phoneme symbol {ph:?}")));
    }
    Ok(ph.to_string())
}

/// Parses a lexicon, merging variants of one headword into one entry in
/// first-appearance order.
pub fn parse_lexicon(
    text: &str,
    format: LexiconFormat,
    strip_stress: bool,
) -> Result<Vec<LexiconEntry>, LexiconError> {
    let mut entries: Vec<LexiconEntry> = Vec::new();
    let mut by_word: BTreeMap<Vec<char>, usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() {
            continue;
        }
        let (head, rest) = match format {
            LexiconFormat::CmuDict => {
                if raw.starts_with(";;;") {
                    continue;
                }
                let trimmed = match raw.split_once(" #") {
                    Some((body, _)) => body.trim(),
                    None => raw.trim(),
                };
                match trimmed.find(char::is_whitespace) {
                    Some(p) => (strip_variant_marker(&trimmed[..p], line)?, &trimmed[p..]),
                    None => (strip_variant_marker(trimmed, line)?, ""),
                }
            }
            LexiconFormat::Tabular => match raw.split_once('\t') {
                Some((w, r)) => (w.trim(), r),
                None => return Err(parse_error(line, "expected word<TAB>phonemes")),
            },
        };
        if head.is_empty() {
            return Err(parse_error(line, "empty word"));
        }
        if head.chars().any(char::is_whitespace) {
            return Err(parse_error(line, format!("word {head:?} contains whitespace")));
        }
        let pron = rest
            .split_whitespace()
            .map(|t| clean_phoneme(t, strip_stress, line))
            .collect::<Result<Vec<_>, _>>()?;
        let word: Vec<char> = head.chars().flat_map(char::to_uppercase).collect();
        if pron.is_empty() {
            return Err(LexiconError::EmptyPronunciation { line, word: word.iter().collect() });
        }
        match by_word.get(&word) {
            Some(&i) => entries[i].add_pronunciation(pron),
            None => {
                by_word.insert(word.clone(), entries.len());
                entries.push(LexiconEntry { word, pronunciations: alloc::vec![pron] });
            }
        }
    }
    Ok(entries)
}

/// Canonical tabular form: one line per variant, variants consecutive.
pub fn serialize_lexicon(entries: &[LexiconEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let word = e.word_string();
        for p in &e.pronunciations {
            out.push_str(&word);
            out.push('\t');
            out.push_str(&p.join(" "));
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Letter,
    Phoneme,
}

/// Dense symbol inventory. Reserved symbols sit at fixed indices:
/// [`BOS`] and [`EOS`] on both sides, [`NULL`] on the phoneme side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    kind: SymbolKind,
    symbols: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl SymbolTable {
    fn reserved(kind: SymbolKind) -> &'static [&'static str] {
        match kind {
            SymbolKind::Letter => &[LETTER_BOS, LETTER_EOS],
            SymbolKind::Phoneme => &[PHONE_BOS, PHONE_EOS, PHONE_NULL],
        }
    }

    /// A table holding the reserved symbols followed by `symbols` in
    /// lexicographic order.
    pub fn new<I, S>(kind: SymbolKind, symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut table = Self { kind, symbols: Vec::new(), index: BTreeMap::new() };
        for r in Self::reserved(kind) {
            table.push(r.to_string());
        }
        table.extend(symbols);
        table
    }

    /// Rebuilds a table from its full symbol list (reserved symbols included),
    /// preserving indices.
    pub fn from_symbols(kind: SymbolKind, symbols: Vec<String>) -> Result<Self, LexiconError> {
        let reserved = Self::reserved(kind);
        if symbols.len() < reserved.len() || symbols.iter().zip(reserved).any(|(a, b)| a != b) {
            return Err(LexiconError::InvalidTable("reserved symbols missing or misplaced".to_string()));
        }
        let mut table = Self { kind, symbols: Vec::new(), index: BTreeMap::new() };
        for s in symbols {
            if s.is_empty() || table.index.contains_key(&s) {
                return Err(LexiconError::InvalidTable(format!("empty or duplicate symbol {s:?}")));
            }
            table.push(s);
        }
        Ok(table)
    }

    fn push(&mut self, s: String) {
        self.index.insert(s.clone(), self.symbols.len());
        self.symbols.push(s);
    }

    /// Appends the symbols not yet present, in lexicographic order. Existing
    /// indices never move.
    pub fn extend<I, S>(&mut self, symbols: I) -> usize
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let fresh: BTreeSet<String> = symbols
            .into_iter()
            .map(Into::into)
            .filter(|s: &String| !s.is_empty() && !self.index.contains_key(s))
            .collect();
        let added = fresh.len();
        for s in fresh {
            self.push(s);
        }
        added
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, index: usize) -> Option<&str> {
        self.symbols.get(index).map(String::as_str)
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn letter_index(&self, letter: char) -> Option<usize> {
        let mut buf = [0u8; 4];
        self.index_of(letter.encode_utf8(&mut buf))
    }
}

/// Letter and phoneme tables covering every symbol in `entries`.
pub fn build_symbol_tables(entries: &[LexiconEntry]) -> Result<(SymbolTable, SymbolTable), LexiconError> {
    if entries.is_empty() {
        return Err(LexiconError::Empty);
    }
    let letters: BTreeSet<String> =
        entries.iter().flat_map(|e| e.word.iter().map(|c| c.to_string())).collect();
    let phonemes: BTreeSet<&str> = entries
        .iter()
        .flat_map(|e| e.pronunciations.iter().flatten().map(String::as_str))
        .collect();
    Ok((SymbolTable::new(SymbolKind::Letter, letters), SymbolTable::new(SymbolKind::Phoneme, phonemes)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Partition {
    Train,
    Validation,
    Test,
}

impl core::fmt::Display for Partition {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Partition::Train => "train",
            Partition::Validation => "validation",
            Partition::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: Vec<LexiconEntry>,
    pub validation: Vec<LexiconEntry>,
    pub test: Vec<LexiconEntry>,
}

impl DatasetSplit {
    pub fn partition(&self, which: Partition) -> &[LexiconEntry] {
        match which {
            Partition::Train => &self.train,
            Partition::Validation => &self.validation,
            Partition::Test => &self.test,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitReport {
    /// Lexicon words that no partition lists.
    pub unlisted: Vec<String>,
    /// Listed words that are absent from the lexicon.
    pub missing: Vec<(Partition, String)>,
}

/// Routes entries to partitions by headword. Each listing holds one headword
/// per line; blank lines are ignored and words are matched case-insensitively.
pub fn load_split(
    entries: &[LexiconEntry],
    train_list: &str,
    validation_list: Option<&str>,
    test_list: &str,
) -> Result<(DatasetSplit, SplitReport), LexiconError> {
    let mut assignment: BTreeMap<String, Partition> = BTreeMap::new();
    let mut order: Vec<(Partition, String)> = Vec::new();
    let listings = [
        (Partition::Train, Some(train_list)),
        (Partition::Validation, validation_list),
        (Partition::Test, Some(test_list)),
    ];
    for (partition, listing) in listings {
        let Some(listing) = listing else { continue };
        for raw in listing.lines() {
            let w = raw.trim();
            if w.is_empty() {
                continue;
            }
            let w: String = w.chars().flat_map(char::to_uppercase).collect();
            match assignment.get(&w) {
                Some(&p) if p == partition => {}
                Some(&p) => {
                    return Err(LexiconError::PartitionConflict { word: w, first: p, second: partition })
                }
                None => {
                    assignment.insert(w.clone(), partition);
                    order.push((partition, w));
                }
            }
        }
    }
    let mut split = DatasetSplit::default();
    let mut report = SplitReport::default();
    let mut present = BTreeSet::new();
    for e in entries {
        let w = e.word_string();
        match assignment.get(&w) {
            Some(Partition::Train) => split.train.push(e.clone()),
            Some(Partition::Validation) => split.validation.push(e.clone()),
            Some(Partition::Test) => split.test.push(e.clone()),
            None => report.unlisted.push(w.clone()),
        }
        present.insert(w);
    }
    report.missing = order.into_iter().filter(|(_, w)| !present.contains(w)).collect();
    Ok((split, report))
}
