#![allow(dead_code)]

use otfs_rake::channel::{ChannelModel, ChannelPath};
use otfs_rake::frame::{map_to_grid, qam_modulate, DelayDopplerGrid, FrameConfig, QamAlphabet};
use otfs_rake::C64;
use rand::Rng;

/// `paths` paths with delays in `0..=l_max`, Doppler taps in `-k..=k`,
/// complex Gaussian-ish gains, unit total power.
pub fn random_channel(rng: &mut impl Rng, cfg: &FrameConfig, paths: usize, k: i64) -> ChannelModel {
    let p = (0..paths)
        .map(|_| {
            let gain = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            ChannelPath::new(
                gain,
                rng.random_range(0..=cfg.l_max()),
                rng.random_range(-k..=k),
            )
        })
        .collect();
    ChannelModel::new(p).normalized()
}

pub fn random_bits(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

/// Random payload bits and the transmit grid they map to.
pub fn random_frame(
    rng: &mut impl Rng,
    cfg: &FrameConfig,
    q: &QamAlphabet,
) -> (Vec<u8>, DelayDopplerGrid) {
    let bits = random_bits(rng, cfg.payload_len() * q.bits_per_symbol());
    let grid = map_to_grid(&qam_modulate(&bits, q).unwrap(), cfg).unwrap();
    (bits, grid)
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
