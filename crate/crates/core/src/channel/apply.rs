use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ChannelModel, DopplerSpreadTable};
use crate::frame::{DelayDopplerGrid, FrameConfig};
use crate::{Error, Result, C64};

/// Passes a transmit frame through the channel and adds complex AWGN of
/// total variance `sigma_w^2` per entry. Deterministic for a given seed.
pub fn apply_channel(
    x: &DelayDopplerGrid,
    table: &DopplerSpreadTable,
    sigma_w: f64,
    seed: u64,
) -> Result<DelayDopplerGrid> {
    apply_channel_with_rng(x, table, sigma_w, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn apply_channel_with_rng<R: Rng + ?Sized>(
    x: &DelayDopplerGrid,
    table: &DopplerSpreadTable,
    sigma_w: f64,
    rng: &mut R,
) -> Result<DelayDopplerGrid> {
    let cfg = table.config();
    if !x.matches(cfg) {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{}", cfg.delay_bins(), cfg.doppler_bins()),
            got: format!("{}x{}", x.rows(), x.cols()),
        });
    }
    x.check_null_rows(cfg)?;

    let n = cfg.doppler_bins();
    let plan = table.plan();
    let mut scratch = plan.scratch();
    let mut acc = vec![C64::default(); cfg.delay_bins() * n];
    let mut xf = vec![C64::default(); n];
    for m in 0..cfg.payload_rows() {
        xf.copy_from_slice(x.row(m));
        plan.forward(&mut xf, &mut scratch);
        for (li, &l) in table.delays().iter().enumerate() {
            let target = &mut acc[(m + l) * n..(m + l + 1) * n];
            for ((t, a), b) in target.iter_mut().zip(table.spectrum(m, li)).zip(&xf) {
                *t += a * b;
            }
        }
    }
    for row in acc.chunks_exact_mut(n) {
        plan.inverse(row, &mut scratch);
    }
    add_awgn(&mut acc, sigma_w, rng);
    DelayDopplerGrid::received(cfg, acc)
}

/// Adds circularly-symmetric Gaussian noise, `sigma_w^2 / 2` per component.
pub fn add_awgn<R: Rng + ?Sized>(data: &mut [C64], sigma_w: f64, rng: &mut R) {
    if sigma_w == 0.0 {
        return;
    }
    let s = sigma_w / std::f64::consts::SQRT_2;
    for v in data.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += C64::new(re * s, im * s);
    }
}

/// Time-domain channel for sample streams:
/// `y(q) = sum_i h_i x(q - l_i) exp(j 2 pi k_i q / (M N))`, zero history.
pub fn apply_channel_time(x: &[C64], model: &ChannelModel, cfg: &FrameConfig) -> Vec<C64> {
    let mut y = vec![C64::default(); x.len()];
    for p in model.paths() {
        for q in p.delay..x.len() {
            y[q] += p.gain * x[q - p.delay] * cfg.z_pow(p.doppler * q as i64);
        }
    }
    y
}
