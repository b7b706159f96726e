use alloc::vec::Vec;

use super::NnError;
use crate::Real;

pub fn softmax<R: Real>(logits: &[R]) -> Vec<R> {
    let max = logits.iter().copied().fold(logits[0], R::max);
    let exps: Vec<R> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum = exps.iter().copied().fold(R::ZERO, |a, b| a + b);
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax<R: Real>(logits: &[R]) -> Vec<R> {
    let max = logits.iter().copied().fold(logits[0], R::max);
    let sum = logits.iter().map(|&v| (v - max).exp()).fold(R::ZERO, |a, b| a + b);
    let lse = max + sum.ln();
    logits.iter().map(|&v| v - lse).collect()
}

/// Cross-entropy of `softmax(logits)` against `target`, with its gradient
/// with respect to the logits.
pub fn softmax_xent<R: Real>(logits: &[R], target: usize) -> Result<(R, Vec<R>), NnError> {
    if target >= logits.len() {
        return Err(NnError::IndexOutOfRange { target, size: logits.len() });
    }
    let logp = log_softmax(logits);
    let loss = -logp[target];
    let mut grad: Vec<R> = logp.iter().map(|&l| l.exp()).collect();
    grad[target] -= R::ONE;
    Ok((loss, grad))
}
