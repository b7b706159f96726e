//! Line-oriented text formats.

use std::fmt::Write as _;

use g2p_core::aligner::{AlignedPair, Slot};
use g2p_core::decoder::Decoded;
use g2p_core::metrics::EvalReport;
use g2p_core::model::EpochRecord;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError { line, message: message.into() }
}

/// `LETTERS<TAB>slot slot ...`, one pair per line.
pub fn write_aligned(pairs: &[AlignedPair]) -> String {
    let mut out = String::new();
    for p in pairs {
        let slots: Vec<String> = p.slots.iter().map(Slot::to_string).collect();
        let _ = writeln!(out, "{}\t{}", p.word(), slots.join(" "));
    }
    out
}

pub fn read_aligned(text: &str) -> Result<Vec<AlignedPair>, FormatError> {
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (word, slots) = line.split_once('\t').ok_or_else(|| err(line_no, "expected letters<TAB>slots"))?;
        let letters: Vec<char> = word.chars().collect();
        let slots = slots
            .split_whitespace()
            .map(Slot::parse)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| err(line_no, e.to_string()))?;
        pairs.push(AlignedPair::new(letters, slots).map_err(|e| err(line_no, e.to_string()))?);
    }
    Ok(pairs)
}

/// `WORD<TAB>log-likelihood<TAB>ph ph ...` per hypothesis, best first.
pub fn write_decoded(out: &mut String, word: &str, hyps: &[Decoded]) {
    for h in hyps {
        let _ = writeln!(out, "{word}\t{:.6}\t{}", h.log_likelihood, h.phonemes.join(" "));
    }
}

/// The first (best) hypothesis listed for each word, in file order.
pub fn read_best_hypotheses(text: &str) -> Result<Vec<(String, Vec<String>)>, FormatError> {
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    let mut last: Option<String> = None;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (Some(word), Some(score), Some(phones)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(n + 1, "expected word<TAB>log-likelihood<TAB>phonemes"));
        };
        score.parse::<f64>().map_err(|_| err(n + 1, format!("bad log-likelihood {score:?}")))?;
        let word: String = word.chars().flat_map(char::to_uppercase).collect();
        if last.as_deref() == Some(word.as_str()) {
            continue;
        }
        last = Some(word.clone());
        out.push((word, phones.split_whitespace().map(String::from).collect()));
    }
    Ok(out)
}

pub const HISTORY_HEADER: &str = "epoch\ttrain_ce\tvalid_ce\tlr";

pub fn history_line(r: &EpochRecord) -> String {
    let valid = r.valid_ce.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
    format!("{}\t{:.6}\t{valid}\t{}", r.epoch, r.train_ce, r.lr)
}

pub fn summary_line(report: &EvalReport) -> String {
    format!("PER {:.2}% WER {:.2}%", report.per(), report.wer())
}

/// `word<TAB>hyp<TAB>chosen-ref<TAB>edits` per scored word.
pub fn per_word_tsv(report: &EvalReport) -> String {
    let mut out = String::new();
    for r in &report.records {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", r.word, r.hypothesis.join(" "), r.reference.join(" "), r.edits);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_round_trip() {
        let text = "TANGLE\tT AE NG G AH:L ∅\nAX\tAE K:S\n";
        let pairs = read_aligned(text).unwrap();
        assert_eq!(pairs[0].slots[4], Slot::Compound("AH".into(), "L".into()));
        assert_eq!(write_aligned(&pairs), text);
    }

    #[test]
    fn aligned_errors_carry_line() {
        assert_eq!(read_aligned("AB\tK\n").unwrap_err().line, 1);
        assert_eq!(read_aligned("A\tK\nB\tK:\n").unwrap_err().line, 2);
    }

    #[test]
    fn best_hypothesis_is_first_line() {
        let text = "read\t-0.100000\tR IY D\nREAD\t-1.300000\tR EH D\nCAT\t-0.010000\tK AE T\n";
        let best = read_best_hypotheses(text).unwrap();
        assert_eq!(best.len(), 2);
        assert_eq!(best[0], ("READ".to_string(), vec!["R".into(), "IY".into(), "D".into()]));
        assert!(read_best_hypotheses("CAT\tK AE T\n").is_err());
    }

    #[test]
    fn empty_pronunciation_is_allowed() {
        let best = read_best_hypotheses("X\t-2.000000\t\n").unwrap();
        assert_eq!(best, vec![("X".to_string(), vec![])]);
    }
}
