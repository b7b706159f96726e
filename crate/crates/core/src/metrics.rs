//! Phoneme and word error rates against multiple reference pronunciations.
//!
//! A word's phoneme edits are taken against its closest reference variant,
//! and the word counts as an error only if it matches no variant exactly.
//! PER divides total edits by the total length of the chosen variants.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::lexicon::LexiconEntry;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("empty reference set")]
    NoReferences,
    #[error("no hypothesis for test word {0}")]
    MissingHypothesis(String),
    #[error("more than one hypothesis for word {0}")]
    DuplicateHypothesis(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EditOps {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
}

impl EditOps {
    pub fn total(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }
}

/// Unit-cost Levenshtein distance from `hyp` to `reference`, with one optimal
/// breakdown into operations. Insertions are extra hypothesis symbols and
/// deletions are missing reference symbols.
pub fn edit_distance<T: PartialEq>(hyp: &[T], reference: &[T]) -> (usize, EditOps) {
    let (n, m) = (hyp.len(), reference.len());
    let w = m + 1;
    let mut d = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i;
    }
    for j in 0..=m {
        d[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[(i - 1) * w + j - 1] + usize::from(hyp[i - 1] != reference[j - 1]);
            d[i * w + j] = sub.min(d[(i - 1) * w + j] + 1).min(d[i * w + j - 1] + 1);
        }
    }
    let mut ops = EditOps::default();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && here == d[(i - 1) * w + j - 1] + usize::from(hyp[i - 1] != reference[j - 1]) {
            if hyp[i - 1] != reference[j - 1] {
                ops.substitutions += 1;
            }
            i -= 1;
            j -= 1;
        } else if i > 0 && here == d[(i - 1) * w + j] + 1 {
            ops.insertions += 1;
            i -= 1;
        } else {
            ops.deletions += 1;
            j -= 1;
        }
    }
    (d[n * w + m], ops)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordScore {
    pub edits: usize,
    /// Index into the reference list of the closest variant.
    pub chosen: usize,
    pub word_error: bool,
}

/// Scores one hypothesis against its references. Equally close references
/// resolve to the shortest, then the lexicographically smallest.
pub fn score_word<T: PartialEq + Ord>(hyp: &[T], references: &[Vec<T>]) -> Result<WordScore, MetricsError> {
    let mut best: Option<(usize, usize)> = None;
    for (idx, r) in references.iter().enumerate() {
        let (d, _) = edit_distance(hyp, r);
        let better = match best {
            None => true,
            Some((bd, bi)) => {
                let b = &references[bi];
                (d, r.len()).cmp(&(bd, b.len())).then_with(|| r.cmp(b)).is_lt()
            }
        };
        if better {
            best = Some((d, idx));
        }
    }
    let (edits, chosen) = best.ok_or(MetricsError::NoReferences)?;
    Ok(WordScore { edits, chosen, word_error: edits > 0 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordRecord {
    pub word: String,
    pub hypothesis: Vec<String>,
    pub reference: Vec<String>,
    pub edits: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub records: Vec<WordRecord>,
    pub phoneme_edits: usize,
    pub reference_phonemes: usize,
    pub word_errors: usize,
    pub words: usize,
}

impl EvalReport {
    /// Percent; not clamped, so it can exceed 100.
    pub fn per(&self) -> f64 {
        if self.reference_phonemes == 0 {
            0.0
        } else {
            100.0 * self.phoneme_edits as f64 / self.reference_phonemes as f64
        }
    }

    pub fn wer(&self) -> f64 {
        if self.words == 0 {
            0.0
        } else {
            100.0 * self.word_errors as f64 / self.words as f64
        }
    }
}

/// Scores one hypothesis per entry of `reference_entries`, in their order.
pub fn evaluate(
    hypotheses: &[(String, Vec<String>)],
    reference_entries: &[LexiconEntry],
) -> Result<EvalReport, MetricsError> {
    let mut by_word: BTreeMap<&str, &Vec<String>> = BTreeMap::new();
    for (w, h) in hypotheses {
        if by_word.insert(w.as_str(), h).is_some() {
            return Err(MetricsError::DuplicateHypothesis(w.clone()));
        }
    }
    let mut report = EvalReport {
        records: Vec::with_capacity(reference_entries.len()),
        phoneme_edits: 0,
        reference_phonemes: 0,
        word_errors: 0,
        words: 0,
    };
    for e in reference_entries {
        let word = e.word_string();
        let hyp = by_word.get(word.as_str()).ok_or_else(|| MetricsError::MissingHypothesis(word.clone()))?;
        let score = score_word(hyp, &e.pronunciations)?;
        let reference = e.pronunciations[score.chosen].clone();
        report.phoneme_edits += score.edits;
        report.reference_phonemes += reference.len();
        report.word_errors += usize::from(score.word_error);
        report.words += 1;
        report.records.push(WordRecord { word, hypothesis: (*hyp).clone(), reference, edits: score.edits });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn p(s: &str) -> Vec<String> {
        s.split_whitespace().map(|x| x.to_string()).collect()
    }

    #[test]
    fn distances() {
        assert_eq!(edit_distance(&p("K AE T"), &p("K AE T")).0, 0);
        let (d, ops) = edit_distance(&p("K AE"), &p("K AE T"));
        assert_eq!((d, ops.deletions), (1, 1));
        assert_eq!(edit_distance(&p("A B C"), &p("C B A")).0, 2);
        let (d, ops) = edit_distance(&p("A B C D"), &p("B C"));
        assert_eq!((d, ops.insertions), (2, 2));
    }

    #[test]
    fn multi_reference_scoring() {
        let refs = vec![p("R EH D"), p("R IY D")];
        assert_eq!(score_word(&p("R IY D"), &refs).unwrap(), WordScore { edits: 0, chosen: 1, word_error: false });
        let s = score_word(&p("R IH D"), &refs).unwrap();
        assert_eq!((s.edits, s.word_error), (1, true));
        let s = score_word(&[], &[p("K AE T")]).unwrap();
        assert_eq!((s.edits, s.word_error), (3, true));
        assert_eq!(score_word::<String>(&p("K"), &[]).unwrap_err(), MetricsError::NoReferences);
    }

    #[test]
    fn tie_prefers_shorter_reference() {
        let refs = vec![p("A B C"), p("A B")];
        let s = score_word(&p("A X"), &refs).unwrap();
        assert_eq!((s.edits, s.chosen), (1, 1));
    }

    #[test]
    fn four_word_aggregate() {
        let refs = vec![
            LexiconEntry::new("CAT", vec![p("K AE T")]),
            LexiconEntry::new("DOG", vec![p("D AO G")]),
            LexiconEntry::new("READ", vec![p("R EH D"), p("R IY D")]),
            LexiconEntry::new("BIT", vec![p("B IH T")]),
        ];
        let hyps = vec![
            ("CAT".to_string(), p("K AE T")),
            ("DOG".to_string(), p("D AA G")),
            ("READ".to_string(), p("R IY D")),
            ("BIT".to_string(), p("B IH T")),
        ];
        let r = evaluate(&hyps, &refs).unwrap();
        assert_eq!((r.phoneme_edits, r.reference_phonemes, r.word_errors, r.words), (1, 12, 1, 4));
        assert_eq!(alloc::format!("{:.2} {:.2}", r.per(), r.wer()), "8.33 25.00");
    }

    #[test]
    fn coverage_errors() {
        let refs = vec![LexiconEntry::new("CAT", vec![p("K AE T")])];
        assert_eq!(evaluate(&[], &refs).unwrap_err(), MetricsError::MissingHypothesis("CAT".into()));
        let dup = vec![("CAT".to_string(), p("K")), ("CAT".to_string(), p("K AE T"))];
        assert_eq!(evaluate(&dup, &refs).unwrap_err(), MetricsError::DuplicateHypothesis("CAT".into()));
    }
}
