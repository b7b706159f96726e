use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{check_len, NnError, Parameters};
use crate::Real;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    values: Vec<R>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, NnError> {
        if rows == 0 || cols == 0 {
            return Err(NnError::InvalidShape("matrix dimensions must be positive"));
        }
        Ok(Self { rows, cols, values: vec![R::ZERO; rows * cols] })
    }

    pub fn from_vec(rows: usize, cols: usize, values: Vec<R>) -> Result<Self, NnError> {
        if rows == 0 || cols == 0 {
            return Err(NnError::InvalidShape("matrix dimensions must be positive"));
        }
        check_len(rows * cols, values.len())?;
        Ok(Self { rows, cols, values })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn values(&self) -> &[R] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [R] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> R {
        self.values[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: R) {
        self.values[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[R] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [R] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    /// `y += W x`
    #[inline]
    pub fn matvec_acc(&self, x: &[R], y: &mut [R]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (yr, row) in y.iter_mut().zip(self.values.chunks_exact(self.cols)) {
            let mut acc = R::ZERO;
            for (w, xv) in row.iter().zip(x) {
                acc += *w * *xv;
            }
            *yr += acc;
        }
    }

    /// `x += Wᵀ y`
    #[inline]
    pub fn matvec_t_acc(&self, y: &[R], x: &mut [R]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (yr, row) in y.iter().zip(self.values.chunks_exact(self.cols)) {
            if *yr == R::ZERO {
                continue;
            }
            for (xv, w) in x.iter_mut().zip(row) {
                *xv += *w * *yr;
            }
        }
    }

    /// `W += y xᵀ`
    #[inline]
    pub fn outer_acc(&mut self, y: &[R], x: &[R]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (yr, row) in y.iter().zip(self.values.chunks_exact_mut(self.cols)) {
            if *yr == R::ZERO {
                continue;
            }
            for (w, xv) in row.iter_mut().zip(x) {
                *w += *yr * *xv;
            }
        }
    }

    pub fn init_uniform<G: Rng + ?Sized>(&mut self, scale: f64, rng: &mut G) {
        fill_uniform(&mut self.values, scale, rng);
    }

    pub fn cast<S: Real>(&self) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| S::from_f64(v.to_f64())).collect(),
        }
    }
}

impl<R: Real> Parameters<R> for Matrix<R> {
    fn tensors(&self) -> Vec<&[R]> {
        vec![&self.values]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [R]> {
        vec![&mut self.values]
    }
}

/// Draws each value i.i.d. uniform on `[-scale, scale]`; the draw is done in
/// `f64` so `f32` and `f64` parameters from one seed agree up to rounding.
pub(crate) fn fill_uniform<R: Real, G: Rng + ?Sized>(values: &mut [R], scale: f64, rng: &mut G) {
    for v in values {
        let u: f64 = rng.random();
        *v = R::from_f64(scale * (2.0 * u - 1.0));
    }
}

/// A `rows × cols` matrix with entries drawn uniformly from `[-scale, scale]`.
pub fn init_params<R: Real, G: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    scale: f64,
    rng: &mut G,
) -> Result<Matrix<R>, NnError> {
    if !(scale >= 0.0) || !scale.is_finite() {
        return Err(NnError::InvalidShape("initialization scale must be finite and non-negative"));
    }
    let mut m = Matrix::zeros(rows, cols)?;
    m.init_uniform(scale, rng);
    Ok(m)
}
