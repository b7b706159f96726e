mod common;

use common::recursive_edit_distance;
use g2p_core::lexicon::LexiconEntry;
use g2p_core::metrics::{edit_distance, evaluate, score_word, MetricsError};
use proptest::prelude::*;

fn seq() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..5, 0..=8)
}

fn strs(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

#[test]
fn four_word_aggregation() {
    let refs = vec![
        LexiconEntry::new("CAT", vec![strs("K AE T")]),
        LexiconEntry::new("DOG", vec![strs("D AO G")]),
        LexiconEntry::new("READ", vec![strs("R EH D"), strs("R IY D")]),
        LexiconEntry::new("SIT", vec![strs("S IH T")]),
    ];
    let hyps = vec![
        ("CAT".to_string(), strs("K AE T")),
        ("DOG".to_string(), strs("D AA G")),
        ("READ".to_string(), strs("R IY D")),
        ("SIT".to_string(), strs("S IH T")),
    ];
    let r = evaluate(&hyps, &refs).unwrap();
    assert_eq!(r.reference_phonemes, 12);
    assert_eq!(format!("{:.2} {:.2}", r.per(), r.wer()), "8.33 25.00");
    assert_eq!(r.records.iter().map(|w| w.edits).sum::<usize>(), r.phoneme_edits);
}

#[test]
fn coverage_is_enforced() {
    let refs = vec![LexiconEntry::new("CAT", vec![strs("K AE T")])];
    assert_eq!(evaluate(&[], &refs), Err(MetricsError::MissingHypothesis("CAT".into())));
    let dup = vec![("CAT".to_string(), strs("K")), ("CAT".to_string(), strs("K"))];
    assert_eq!(evaluate(&dup, &refs), Err(MetricsError::DuplicateHypothesis("CAT".into())));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn matches_recursive_oracle(a in seq(), b in seq()) {
        let (d, ops) = edit_distance(&a, &b);
        prop_assert_eq!(d, recursive_edit_distance(&a, &b));
        prop_assert_eq!(ops.total(), d);
        prop_assert_eq!(ops.insertions + b.len(), ops.deletions + a.len());
    }

    #[test]
    fn metric_axioms(a in seq(), b in seq(), c in seq()) {
        let d = |x: &[u8], y: &[u8]| edit_distance(x, y).0;
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
    }
}

proptest! {
    #[test]
    fn best_reference_is_the_minimum(hyp in seq(), refs in prop::collection::vec(seq(), 1..4)) {
        let s = score_word(&hyp, &refs).unwrap();
        for r in &refs {
            prop_assert!(s.edits <= edit_distance(&hyp, r).0);
        }
        prop_assert_eq!(s.edits, edit_distance(&hyp, &refs[s.chosen]).0);
        prop_assert_eq!(s.word_error, !refs.contains(&hyp));
        let mut rev = refs.clone();
        rev.reverse();
        let t = score_word(&hyp, &rev).unwrap();
        prop_assert_eq!((s.edits, s.word_error), (t.edits, t.word_error));
        prop_assert_eq!(&refs[s.chosen], &rev[t.chosen]);
    }
}
