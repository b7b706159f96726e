//! Minimal dense numeric layer used by every architecture.

mod gradcheck;
mod lstm;
mod matrix;
mod sgd;
mod softmax;

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::Real;

pub use gradcheck::grad_check;
pub use lstm::{lstm_cell_backward, lstm_cell_forward, LstmCellParams, LstmState, LstmStepCache, LstmStepGrads};
pub use matrix::{init_params, Matrix};
pub use sgd::sgd_apply;
pub use softmax::{log_softmax, softmax, softmax_xent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NnError {
    #[error("invalid shape: {0}")]
    InvalidShape(&'static str),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("target index {target} out of range for {size} classes")]
    IndexOutOfRange { target: usize, size: usize },
}

/// Seed for every random draw in the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RngSeed(pub u64);

pub type SeededRng = ChaCha8Rng;

impl RngSeed {
    pub fn rng(self) -> SeededRng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// A container of trainable tensors, exposed as flat slices in a fixed order.
///
/// The order is part of the model file format, so implementations must never
/// reorder their tensors.
pub trait Parameters<R: Real> {
    fn tensors(&self) -> Vec<&[R]>;
    fn tensors_mut(&mut self) -> Vec<&mut [R]>;

    fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(R::ZERO);
        }
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// Elementwise `dst += src` over two parameter containers of the same shape.
pub fn accumulate<R: Real, P: Parameters<R>>(dst: &mut P, src: &P) -> Result<(), NnError> {
    let src = src.tensors();
    let mut dst = dst.tensors_mut();
    if src.len() != dst.len() {
        return Err(NnError::DimensionMismatch { expected: dst.len(), actual: src.len() });
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if d.len() != s.len() {
            return Err(NnError::DimensionMismatch { expected: d.len(), actual: s.len() });
        }
        for (a, b) in d.iter_mut().zip(s) {
            *a += *b;
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn check_len(expected: usize, actual: usize) -> Result<(), NnError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NnError::DimensionMismatch { expected, actual })
    }
}
