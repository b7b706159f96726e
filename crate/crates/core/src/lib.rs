//! Grapheme-to-phoneme conversion with LSTM sequence models.
//!
//! This crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! - [`nn`]: dense matrices, the LSTM cell with hand-derived backward pass,
//!   softmax cross-entropy, SGD and a finite-difference gradient checker.
//! - [`lexicon`]: pronunciation lexicon parsing, symbol tables and
//!   train/validation/test partitions.
//! - [`aligner`]: EM-trained monotone letter-to-phoneme alignment where each
//!   letter takes a null, single or compound (two-phoneme) slot.
//! - [`model`]: the encoder-decoder, uni-directional and stacked
//!   bi-directional architectures with teacher-forced BPTT and training.
//! - [`decoder`]: likelihood-band beam search.
//! - [`metrics`]: edit distance and multi-reference PER/WER.
//!
//! File formats, the command-line pipeline and parallel batch decoding live
//! in the companion `g2p` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod aligner;
pub mod decoder;
pub mod lexicon;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod real;

pub use real::Real;
