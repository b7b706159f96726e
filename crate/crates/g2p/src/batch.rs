//! Parallel decoding of word lists.

use std::thread;

use g2p_core::decoder::{beam_decode, BeamConfig, DecodeError, Decoded};
use g2p_core::model::G2PModel;
use g2p_core::Real;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("entry {} ({word}): {error}", .index + 1)]
pub struct WordError {
    /// 0-based position in the input list; shown 1-based.
    pub index: usize,
    pub word: String,
    pub error: DecodeError,
}

pub type WordResult = Result<Vec<Decoded>, WordError>;

/// Decodes every word on up to `workers` threads. The result for word `i` is
/// at index `i` and does not depend on the worker count.
pub fn decode_batch<R: Real + Send + Sync>(
    model: &G2PModel<R>,
    words: &[Vec<char>],
    beam: &BeamConfig,
    nbest: usize,
    workers: usize,
) -> Vec<WordResult> {
    let run = |index: usize| {
        let word = &words[index];
        beam_decode(model, word, beam, nbest).map_err(|error| WordError { index, word: word.iter().collect(), error })
    };
    let workers = workers.clamp(1, words.len().max(1));
    if workers == 1 {
        return (0..words.len()).map(run).collect();
    }
    let mut slots: Vec<Option<WordResult>> = vec![None; words.len()];
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let run = &run;
                s.spawn(move || (w..words.len()).step_by(workers).map(|i| (i, run(i))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("decode worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every index decoded")).collect()
}
