use super::{NnError, Parameters};
use crate::Real;

/// `params -= lr * clip(grads)`. Gradients are the per-sample sum over a
/// minibatch, so `learning_rate` is a per-sample rate.
pub fn sgd_apply<R: Real, P: Parameters<R>>(
    params: &mut P,
    grads: &P,
    learning_rate: R,
    clip: Option<R>,
) -> Result<(), NnError> {
    let grads = grads.tensors();
    let mut params = params.tensors_mut();
    if grads.len() != params.len() {
        return Err(NnError::DimensionMismatch { expected: params.len(), actual: grads.len() });
    }
    for (p, g) in params.iter_mut().zip(&grads) {
        if p.len() != g.len() {
            return Err(NnError::DimensionMismatch { expected: p.len(), actual: g.len() });
        }
    }
    for (p, g) in params.iter_mut().zip(grads) {
        for (pv, &gv) in p.iter_mut().zip(g) {
            let gv = match clip {
                Some(c) => gv.max(-c).min(c),
                None => gv,
            };
            *pv -= learning_rate * gv;
        }
    }
    Ok(())
}
