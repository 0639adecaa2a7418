use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ChannelModel, ChannelPath};
use crate::frame::FrameConfig;
use crate::{Error, Result, C64};

/// Extended Vehicular A excess tap delays.
pub const EVA_DELAYS_NS: [f64; 9] = [
    0.0, 30.0, 150.0, 310.0, 370.0, 710.0, 1090.0, 1730.0, 2510.0,
];
/// Extended Vehicular A relative tap powers.
pub const EVA_POWERS_DB: [f64; 9] = [0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9];

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaParams {
    pub speed_kmh: f64,
    /// Largest Doppler tap a path may take.
    pub doppler_cap: usize,
    /// When set, the maximum Doppler shift follows from speed and carrier;
    /// otherwise the continuous draw spans `0..=doppler_cap` taps.
    pub carrier_hz: Option<f64>,
}

impl Default for EvaParams {
    fn default() -> Self {
        EvaParams {
            speed_kmh: 120.0,
            doppler_cap: 16,
            carrier_hz: None,
        }
    }
}

impl EvaParams {
    /// Maximum Doppler shift expressed in (fractional) Doppler taps.
    pub fn max_doppler_taps(&self, cfg: &FrameConfig) -> f64 {
        match self.carrier_hz {
            Some(fc) => {
                let nu_max = self.speed_kmh / 3.6 * fc / SPEED_OF_LIGHT;
                nu_max * cfg.doppler_bins() as f64 * cfg.symbol_time()
            }
            None => self.doppler_cap as f64,
        }
    }
}

/// EVA delays rounded to the frame's sampling grid (`M * delta_f`).
pub fn eva_delay_taps(cfg: &FrameConfig) -> [usize; 9] {
    EVA_DELAYS_NS.map(|d| (d * 1e-9 * cfg.sample_rate()).round() as usize)
}

/// Draws one EVA realisation: fixed tap powers with uniform random phases,
/// one Doppler tap per path drawn from `U(0, nu_max)` and rounded.
pub fn generate_eva(cfg: &FrameConfig, params: &EvaParams, seed: u64) -> Result<ChannelModel> {
    generate_eva_with_rng(cfg, params, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn generate_eva_with_rng<R: Rng + ?Sized>(
    cfg: &FrameConfig,
    params: &EvaParams,
    rng: &mut R,
) -> Result<ChannelModel> {
    let half = cfg.doppler_bins() / 2;
    if params.doppler_cap >= half {
        return Err(Error::DopplerOutOfRange {
            doppler: params.doppler_cap as i64,
            half,
        });
    }
    let taps = eva_delay_taps(cfg);
    if let Some(&late) = taps.iter().find(|&&t| t > cfg.l_max()) {
        return Err(Error::DelayOutOfRange {
            delay: late,
            l_max: cfg.l_max(),
        });
    }
    let linear: Vec<f64> = EVA_POWERS_DB
        .iter()
        .map(|db| 10f64.powf(db / 10.0))
        .collect();
    let total: f64 = linear.iter().sum();
    let k_cont = params.max_doppler_taps(cfg);
    let paths = taps
        .iter()
        .zip(&linear)
        .map(|(&delay, &p)| {
            let theta = rng.random_range(0.0..2.0 * PI);
            let gain = C64::from_polar((p / total).sqrt(), theta);
            let draw: f64 = rng.random::<f64>() * k_cont;
            let doppler = (draw.round() as usize).min(params.doppler_cap) as i64;
            ChannelPath::new(gain, delay, doppler)
        })
        .collect();
    Ok(ChannelModel::new(paths))
}
