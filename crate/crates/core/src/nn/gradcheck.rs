use super::Parameters;

/// Largest relative disagreement between `analytic` and a central-difference
/// estimate of the gradient of `loss` at `params`:
/// `|a - n| / max(|a|, |n|, 1e-8)` over every parameter entry.
pub fn grad_check<P, F>(mut loss: F, params: &P, analytic: &P, epsilon: f64) -> f64
where
    P: Parameters<f64> + Clone,
    F: FnMut(&P) -> f64,
{
    let mut probe = params.clone();
    let shapes: alloc::vec::Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    let analytic = analytic.tensors();
    let mut worst = 0.0f64;
    for (t, &len) in shapes.iter().enumerate() {
        for j in 0..len {
            let orig = probe.tensors()[t][j];
            probe.tensors_mut()[t][j] = orig + epsilon;
            let up = loss(&probe);
            probe.tensors_mut()[t][j] = orig - epsilon;
            let down = loss(&probe);
            probe.tensors_mut()[t][j] = orig;
            let numeric = (up - down) / (2.0 * epsilon);
            let a = analytic[t][j];
            let denom = a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    worst
}
