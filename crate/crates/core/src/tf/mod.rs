//! Time-frequency processing: symplectic transforms, the single-tap MMSE
//! initial estimate and the CP-OFDM single-tap baseline.
//!
//! Data grids use unitary transforms in both directions, so noise variance
//! and symbol energy carry over unchanged. The channel response `H_tf` is
//! the plain (unnormalised) two-dimensional transform of `H_dd`, which is
//! what makes `isfft(h_dd (*) x) = H_tf * isfft(x)` hold entrywise.

mod ofdm;

use crate::channel::{ChannelModel, DopplerSpreadTable};
use crate::fourier::{fft_cost, FftPair};
use crate::frame::{DelayDopplerGrid, FrameConfig};
use crate::{Error, Result, C64};

pub use ofdm::{ofdm_mmse_baseline, ofdm_mmse_baseline_with_rng};

#[derive(Clone, Copy)]
enum Dir {
    Forward,
    Inverse,
}

// Applies unitary transforms along the delay axis (columns, length M) and
// the Doppler axis (rows, length N) of a row-major M x N grid.
fn transform_2d(data: &mut [C64], rows: usize, cols: usize, along_delay: Dir, along_doppler: Dir) {
    let row_plan = FftPair::new(cols);
    let col_plan = FftPair::new(rows);
    let mut scratch = row_plan.scratch();
    for row in data.chunks_exact_mut(cols) {
        match along_doppler {
            Dir::Forward => row_plan.forward_unitary(row, &mut scratch),
            Dir::Inverse => row_plan.inverse_unitary(row, &mut scratch),
        }
    }
    let mut col_scratch = col_plan.scratch();
    let mut col = vec![C64::default(); rows];
    for n in 0..cols {
        for m in 0..rows {
            col[m] = data[m * cols + n];
        }
        match along_delay {
            Dir::Forward => col_plan.forward_unitary(&mut col, &mut col_scratch),
            Dir::Inverse => col_plan.inverse_unitary(&mut col, &mut col_scratch),
        }
        for m in 0..rows {
            data[m * cols + n] = col[m];
        }
    }
}

/// Inverse symplectic FFT, `F_M A F_N^H`: delay-Doppler to
/// time-frequency (rows become subcarriers, columns time slots).
pub fn isfft(a: &[C64], cfg: &FrameConfig) -> Vec<C64> {
    let mut out = a.to_vec();
    transform_2d(
        &mut out,
        cfg.delay_bins(),
        cfg.doppler_bins(),
        Dir::Forward,
        Dir::Inverse,
    );
    out
}

/// Symplectic FFT, `F_M^H B F_N`, the inverse of [`isfft`].
pub fn sfft(b: &[C64], cfg: &FrameConfig) -> Vec<C64> {
    let mut out = b.to_vec();
    transform_2d(
        &mut out,
        cfg.delay_bins(),
        cfg.doppler_bins(),
        Dir::Inverse,
        Dir::Forward,
    );
    out
}

/// Ideal-pulse delay-Doppler impulse response: `h_i` at `(l_i, [k_i]_N)`,
/// coincident paths summed.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealDdChannel {
    cfg: FrameConfig,
    data: Vec<C64>,
}

impl IdealDdChannel {
    pub fn from_model(model: &ChannelModel, cfg: &FrameConfig) -> Result<Self> {
        model.validate(cfg)?;
        let n = cfg.doppler_bins();
        let mut data = vec![C64::default(); cfg.delay_bins() * n];
        for p in model.paths() {
            data[p.delay * n + p.doppler_bin(n)] += p.gain;
        }
        Ok(IdealDdChannel { cfg: *cfg, data })
    }

    /// Reads `H_dd` off the per-delay Doppler spread vectors.
    pub fn from_table(table: &DopplerSpreadTable) -> Self {
        let cfg = *table.config();
        let n = cfg.doppler_bins();
        let mut data = vec![C64::default(); cfg.delay_bins() * n];
        for (li, &l) in table.delays().iter().enumerate() {
            data[l * n..(l + 1) * n].copy_from_slice(table.base_vector(li));
        }
        IdealDdChannel { cfg, data }
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.data[m * self.cfg.doppler_bins() + n]
    }

    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|v| v.norm() > 0.0).count()
    }

    /// `H_tf(f, t) = sum_i h_i exp(-j 2 pi f l_i / M) exp(j 2 pi t k_i / N)`.
    pub fn frequency_response(&self) -> Vec<C64> {
        let scale = ((self.cfg.delay_bins() * self.cfg.doppler_bins()) as f64).sqrt();
        let mut h = isfft(&self.data, &self.cfg);
        h.iter_mut().for_each(|v| *v *= scale);
        h
    }
}

/// Single-tap MMSE estimate in the time-frequency domain, mapped back to
/// delay-Doppler with null rows cleared.
///
/// `X_tf = conj(H_tf) Y_tf / (|H_tf|^2 + sigma_w^2)`; with `sigma_w = 0` a
/// zero response bin yields zero.
pub fn mmse_tf_estimate(
    received: &DelayDopplerGrid,
    h_dd: &IdealDdChannel,
    sigma_w: f64,
) -> Result<DelayDopplerGrid> {
    let cfg = h_dd.cfg;
    if !received.matches(&cfg) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", cfg.delay_bins(), cfg.doppler_bins()),
            got: format!("{}x{}", received.rows(), received.cols()),
        });
    }
    let noise = sigma_w * sigma_w;
    let h_tf = h_dd.frequency_response();
    let mut x_tf = isfft(received.as_slice(), &cfg);
    for (x, h) in x_tf.iter_mut().zip(&h_tf) {
        let den = h.norm_sqr() + noise;
        *x = if den > 0.0 {
            h.conj() * *x / den
        } else {
            C64::default()
        };
    }
    let mut est = sfft(&x_tf, &cfg);
    est[cfg.payload_len()..]
        .iter_mut()
        .for_each(|v| *v = C64::default());
    DelayDopplerGrid::transmit(&cfg, est)
}

/// Multiplications spent by [`mmse_tf_estimate`]: three 2-D transforms
/// (`NM log2(NM)` each) and three entrywise passes.
pub fn tf_estimate_cost(cfg: &FrameConfig) -> u64 {
    let (m, n) = (cfg.delay_bins(), cfg.doppler_bins());
    let nm = (m * n) as u64;
    // A 2-D transform is N M-point plus M N-point transforms.
    let two_d = n as u64 * fft_cost(m) + m as u64 * fft_cost(n);
    3 * nm + 3 * two_d
}
