//! Non-peephole LSTM cell.
//!
//! ```text
//! i = σ(W_i x + U_i h + b_i)    f = σ(W_f x + U_f h + b_f)
//! o = σ(W_o x + U_o h + b_o)    g = tanh(W_g x + U_g h + b_g)
//! c' = f ⊙ c + i ⊙ g            h' = o ⊙ tanh(c')
//! ```
//!
//! The four per-gate matrices are stored as row blocks of one `4H × I`
//! input matrix and one `4H × H` recurrent matrix, in gate order
//! `i, f, o, g`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::matrix::fill_uniform;
use super::{check_len, Matrix, NnError, Parameters};
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmCellParams<R> {
    input_dim: usize,
    hidden_dim: usize,
    pub(crate) w: Matrix<R>,
    pub(crate) u: Matrix<R>,
    pub(crate) b: Vec<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmState<R> {
    pub h: Vec<R>,
    pub c: Vec<R>,
}

impl<R: Real> LstmState<R> {
    pub fn zeros(hidden_dim: usize) -> Self {
        Self { h: vec![R::ZERO; hidden_dim], c: vec![R::ZERO; hidden_dim] }
    }
}

/// Everything the backward pass needs from one forward step.
#[derive(Debug, Clone)]
pub struct LstmStepCache<R> {
    x: Vec<R>,
    h_prev: Vec<R>,
    c_prev: Vec<R>,
    /// Activated gates, `[i | f | o | g]`.
    gates: Vec<R>,
    tanh_c: Vec<R>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmStepGrads<R> {
    pub dx: Vec<R>,
    pub dh_prev: Vec<R>,
    pub dc_prev: Vec<R>,
}

impl<R: Real> LstmCellParams<R> {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Result<Self, NnError> {
        if input_dim == 0 || hidden_dim == 0 {
            return Err(NnError::InvalidShape("LSTM dimensions must be positive"));
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            w: Matrix::zeros(4 * hidden_dim, input_dim)?,
            u: Matrix::zeros(4 * hidden_dim, hidden_dim)?,
            b: vec![R::ZERO; 4 * hidden_dim],
        })
    }

    /// Uniform weights on `[-scale, scale]`, zero biases.
    pub fn init_uniform<G: Rng + ?Sized>(&mut self, scale: f64, rng: &mut G) {
        fill_uniform(self.w.values_mut(), scale, rng);
        fill_uniform(self.u.values_mut(), scale, rng);
        self.b.fill(R::ZERO);
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    #[inline]
    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn input_weights(&self) -> &Matrix<R> {
        &self.w
    }

    pub fn recurrent_weights(&self) -> &Matrix<R> {
        &self.u
    }

    pub fn bias(&self) -> &[R] {
        &self.b
    }

    pub fn param_count_for(input_dim: usize, hidden_dim: usize) -> usize {
        4 * hidden_dim * (input_dim + hidden_dim + 1)
    }

    pub fn cast<S: Real>(&self) -> LstmCellParams<S> {
        LstmCellParams {
            input_dim: self.input_dim,
            hidden_dim: self.hidden_dim,
            w: self.w.cast(),
            u: self.u.cast(),
            b: self.b.iter().map(|v| S::from_f64(v.to_f64())).collect(),
        }
    }

    /// Unchecked forward step; callers guarantee the dimensions.
    pub(crate) fn step(&self, x: &[R], prev: &LstmState<R>) -> (LstmState<R>, LstmStepCache<R>) {
        let hd = self.hidden_dim;
        let mut z = self.b.clone();
        self.w.matvec_acc(x, &mut z);
        self.u.matvec_acc(&prev.h, &mut z);
        for v in &mut z[..3 * hd] {
            *v = v.sigmoid();
        }
        for v in &mut z[3 * hd..] {
            *v = v.tanh();
        }
        let mut c = Vec::with_capacity(hd);
        let mut h = Vec::with_capacity(hd);
        let mut tanh_c = Vec::with_capacity(hd);
        for k in 0..hd {
            let (i, f, o, g) = (z[k], z[hd + k], z[2 * hd + k], z[3 * hd + k]);
            let ck = f * prev.c[k] + i * g;
            let tc = ck.tanh();
            c.push(ck);
            tanh_c.push(tc);
            h.push(o * tc);
        }
        let cache = LstmStepCache {
            x: x.to_vec(),
            h_prev: prev.h.clone(),
            c_prev: prev.c.clone(),
            gates: z,
            tanh_c,
        };
        (LstmState { h, c }, cache)
    }

    /// Unchecked backward step. Parameter gradients are added into `grads`.
    pub(crate) fn backstep(
        &self,
        cache: &LstmStepCache<R>,
        dh: &[R],
        dc: &[R],
        grads: &mut LstmCellParams<R>,
    ) -> LstmStepGrads<R> {
        let hd = self.hidden_dim;
        let g = &cache.gates;
        let mut dz = vec![R::ZERO; 4 * hd];
        let mut dc_prev = vec![R::ZERO; hd];
        for k in 0..hd {
            let (i, f, o, gg) = (g[k], g[hd + k], g[2 * hd + k], g[3 * hd + k]);
            let tc = cache.tanh_c[k];
            let dct = dc[k] + dh[k] * o * (R::ONE - tc * tc);
            let d_i = dct * gg;
            let d_f = dct * cache.c_prev[k];
            let d_o = dh[k] * tc;
            let d_g = dct * i;
            dz[k] = d_i * i * (R::ONE - i);
            dz[hd + k] = d_f * f * (R::ONE - f);
            dz[2 * hd + k] = d_o * o * (R::ONE - o);
            dz[3 * hd + k] = d_g * (R::ONE - gg * gg);
            dc_prev[k] = dct * f;
        }
        grads.w.outer_acc(&dz, &cache.x);
        grads.u.outer_acc(&dz, &cache.h_prev);
        for (gb, d) in grads.b.iter_mut().zip(&dz) {
            *gb += *d;
        }
        let mut dx = vec![R::ZERO; self.input_dim];
        self.w.matvec_t_acc(&dz, &mut dx);
        let mut dh_prev = vec![R::ZERO; hd];
        self.u.matvec_t_acc(&dz, &mut dh_prev);
        LstmStepGrads { dx, dh_prev, dc_prev }
    }
}

impl<R: Real> Parameters<R> for LstmCellParams<R> {
    fn tensors(&self) -> Vec<&[R]> {
        vec![self.w.values(), self.u.values(), &self.b]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [R]> {
        vec![self.w.values_mut(), self.u.values_mut(), &mut self.b]
    }
}

/// One LSTM time step. Returns the new state and the cache for
/// [`lstm_cell_backward`].
pub fn lstm_cell_forward<R: Real>(
    x: &[R],
    prev: &LstmState<R>,
    params: &LstmCellParams<R>,
) -> Result<(LstmState<R>, LstmStepCache<R>), NnError> {
    check_len(params.input_dim, x.len())?;
    check_len(params.hidden_dim, prev.h.len())?;
    check_len(params.hidden_dim, prev.c.len())?;
    Ok(params.step(x, prev))
}

/// Gradients of one cell step given upstream `dh`, `dc`. Parameter
/// gradients accumulate into `grads`, so repeated calls over an unrolled
/// sequence sum the per-step contributions.
pub fn lstm_cell_backward<R: Real>(
    cache: &LstmStepCache<R>,
    dh: &[R],
    dc: &[R],
    params: &LstmCellParams<R>,
    grads: &mut LstmCellParams<R>,
) -> Result<LstmStepGrads<R>, NnError> {
    check_len(params.hidden_dim, dh.len())?;
    check_len(params.hidden_dim, dc.len())?;
    check_len(params.input_dim, cache.x.len())?;
    check_len(params.input_dim, grads.input_dim)?;
    check_len(params.hidden_dim, grads.hidden_dim)?;
    Ok(params.backstep(cache, dh, dc, grads))
}
