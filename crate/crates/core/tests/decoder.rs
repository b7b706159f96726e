mod common;

use common::*;
use g2p_core::decoder::{beam_decode, beam_search, greedy_search, BeamConfig, DecodeError};
use g2p_core::model::Architecture;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exhaustive_beam(vocab: usize, steps: usize) -> BeamConfig {
    BeamConfig { band: f64::INFINITY, max_beam: vocab.pow(steps as u32), max_length: None }
}

#[test]
fn greedy_equivalence_on_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let t = PrefixTable::random(4, 4, &mut rng);
        let beam = beam_search(&t, &BeamConfig::greedy(), 1).unwrap();
        let (seq, score) = greedy_search(&t);
        assert_eq!(beam[0].symbols, seq);
        assert!((beam[0].log_likelihood - score).abs() < 1e-12);
    }
}

#[test]
fn nbest_is_sorted_and_distinct() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = PrefixTable::random(3, 3, &mut rng);
    let hyps = beam_search(&t, &exhaustive_beam(3, 3), 27).unwrap();
    assert_eq!(hyps.len(), 27);
    for w in hyps.windows(2) {
        assert!(w[0].log_likelihood >= w[1].log_likelihood);
        assert_ne!(w[0].symbols, w[1].symbols);
    }
    let total: f64 = hyps.iter().map(|h| h.log_likelihood.exp()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn real_models_match_exhaustive_search() {
    for arch in [Architecture::EncoderDecoder, Architecture::Unidirectional, Architecture::Bidirectional] {
        for seed in 0..5 {
            let model = toy_model(toy_config(arch, 1, 3, 2.0, seed));
            let v = model.output_vocab();
            for word in [&['A'][..], &['B', 'C']] {
                let letters = model.encode_word(word).unwrap();
                let max_len = if arch.uses_alignment() { word.len() + 2 } else { 3 };
                let all = enumerate_model_outputs(&model, &letters, max_len);
                let (best_seq, best) = all.iter().fold((vec![], f64::NEG_INFINITY), |acc, (s, l)| {
                    if *l > acc.1 { (s.clone(), *l) } else { acc }
                });
                let beam = BeamConfig { band: f64::INFINITY, max_beam: v.pow(max_len as u32), max_length: Some(max_len) };
                let got = beam_decode(&model, word, &beam, 1).unwrap();
                assert_eq!(got[0].symbols, best_seq, "{arch:?} seed {seed}");
                assert!((got[0].log_likelihood - best).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn unknown_letter_is_reported() {
    let model = toy_model(toy_config(Architecture::Unidirectional, 1, 3, 0.1, 1));
    assert_eq!(beam_decode(&model, &['A', 'Z'], &BeamConfig::default(), 1), Err(DecodeError::UnknownLetter('Z')));
    assert_eq!(beam_decode(&model, &[], &BeamConfig::default(), 1), Err(DecodeError::EmptyWord));
}

#[test]
fn alignment_models_emit_one_symbol_per_position() {
    for arch in [Architecture::Unidirectional, Architecture::Bidirectional] {
        let model = toy_model(toy_config(arch, 1, 3, 0.5, 3));
        for d in beam_decode(&model, &['A', 'B', 'C', 'A'], &BeamConfig::default(), 3).unwrap() {
            assert_eq!(d.symbols.len(), 6);
        }
    }
}

#[test]
fn encoder_decoder_respects_length_cap() {
    let model = toy_model(toy_config(Architecture::EncoderDecoder, 1, 1, 0.5, 3));
    let beam = BeamConfig { max_length: Some(2), ..BeamConfig::default() };
    for d in beam_decode(&model, &['A', 'B'], &beam, 5).unwrap() {
        assert!(d.symbols.len() <= 2);
    }
    for d in beam_decode(&model, &['A', 'B'], &BeamConfig::default(), 5).unwrap() {
        assert!(d.symbols.len() <= 4 * 2 + 5);
    }
}

proptest! {
    #[test]
    fn wide_beam_finds_exhaustive_argmax(vocab in 2usize..=4, steps in 1usize..=4, seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = PrefixTable::random(vocab, steps, &mut rng);
        let (seq, score) = t.exhaustive_best();
        let got = beam_search(&t, &exhaustive_beam(vocab, steps), 1).unwrap();
        prop_assert_eq!(&got[0].symbols, &seq);
        prop_assert!((got[0].log_likelihood - score).abs() < 1e-10);
    }

    #[test]
    fn best_score_is_monotone_in_band(vocab in 2usize..=4, steps in 1usize..=4, seed in 0u64..100_000, b1 in 0.0f64..3.0, extra in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = PrefixTable::random(vocab, steps, &mut rng);
        let run = |band| beam_search(&t, &BeamConfig { band, max_beam: 1000, max_length: None }, 1).unwrap()[0].log_likelihood;
        prop_assert!(run(b1 + extra) >= run(b1) - 1e-12);
    }

    #[test]
    fn wider_band_never_loses_the_best(vocab in 2usize..=4, steps in 1usize..=4, seed in 0u64..100_000, band in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = PrefixTable::random(vocab, steps, &mut rng);
        let narrow = beam_search(&t, &BeamConfig { band, max_beam: 1000, max_length: None }, 1).unwrap();
        let (_, best) = t.exhaustive_best();
        prop_assert!(narrow[0].log_likelihood <= best + 1e-12);
        let kept = beam_search(&t, &BeamConfig { band, max_beam: 1000, max_length: None }, 1000).unwrap();
        // Every survivor was within `band` of the leader at its last step.
        for h in &kept {
            prop_assert!(h.log_likelihood >= kept[0].log_likelihood - band - 1e-12);
        }
    }
}
