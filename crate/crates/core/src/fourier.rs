//! FFT plans and Fourier-domain helpers.
//!
//! Row transforms along the Doppler axis are unnormalised in the forward
//! direction and scaled by `1/N` on the inverse, so a circulant matrix with
//! first column `v` acts on `x` as `ifft(fft(v) * fft(x))`.

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::C64;

/// Cost of one `n`-point FFT in complex multiplications, `n * log2(n)`.
pub fn fft_cost(n: usize) -> u64 {
    (n as u64) * u64::from(n.trailing_zeros())
}

/// Forward/inverse plan pair for one transform length.
#[derive(Clone)]
pub struct FftPair {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FftPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftPair").field("len", &self.len).finish()
    }
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scratch(&self) -> Vec<C64> {
        let n = self
            .forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len());
        vec![C64::default(); n]
    }

    /// Unnormalised forward DFT of every `len`-sized chunk of `buf`.
    pub fn forward(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    /// Inverse DFT scaled by `1/len`.
    pub fn inverse(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.inverse.process_with_scratch(buf, scratch);
        let s = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|v| *v *= s);
    }

    /// Unitary forward DFT (scaled by `1/sqrt(len)`).
    pub fn forward_unitary(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.forward.process_with_scratch(buf, scratch);
        let s = 1.0 / (self.len as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= s);
    }

    /// Unitary inverse DFT (scaled by `1/sqrt(len)`).
    pub fn inverse_unitary(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.inverse.process_with_scratch(buf, scratch);
        let s = 1.0 / (self.len as f64).sqrt();
        buf.iter_mut().for_each(|v| *v *= s);
    }

    pub fn fft(&self, v: &[C64]) -> Vec<C64> {
        let mut out = v.to_vec();
        let mut scratch = self.scratch();
        self.forward(&mut out, &mut scratch);
        out
    }

    pub fn ifft(&self, v: &[C64]) -> Vec<C64> {
        let mut out = v.to_vec();
        let mut scratch = self.scratch();
        self.inverse(&mut out, &mut scratch);
        out
    }
}

/// Multiplies `x` by the circulant matrix whose first column is `first_col`.
///
/// Fourier-domain evaluation; see [`circulant_matvec_direct`] for the
/// explicit product.
pub fn circulant_matvec(plan: &FftPair, first_col: &[C64], x: &[C64]) -> Vec<C64> {
    let spec = plan.fft(first_col);
    let mut xs = plan.fft(x);
    xs.iter_mut().zip(&spec).for_each(|(a, b)| *a *= b);
    plan.ifft(&xs)
}

/// Explicit `O(N^2)` circulant product, `y(n) = sum_k v(k) x([n - k]_N)`.
pub fn circulant_matvec_direct(first_col: &[C64], x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| first_col[k] * x[(i + n - k) % n])
                .sum::<C64>()
        })
        .collect()
}
