//! Sparse delay-Doppler channels.
//!
//! A channel is a short list of paths `(h_i, l_i, k_i)`. With null rows in
//! the transmit frame each received row is a sum of circulant products,
//! `y_m = sum_{l in L} K_{m,l} x_{m-l}`, where `K_{m,l}` has first column
//! `nu_{m,l} = nu_l * phi_{m-l}`. [`DopplerSpreadTable`] holds those vectors
//! and their spectra; [`apply_channel`] runs the fast row-wise product.

mod apply;
mod eva;
mod spread;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::frame::FrameConfig;
use crate::{Error, Result, C64};

pub use apply::{add_awgn, apply_channel, apply_channel_time, apply_channel_with_rng};
pub use eva::{
    eva_delay_taps, generate_eva, generate_eva_with_rng, EvaParams, EVA_DELAYS_NS, EVA_POWERS_DB,
};
pub use spread::DopplerSpreadTable;

/// One propagation path: complex gain, integer delay tap and signed integer
/// Doppler tap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPath {
    pub gain: C64,
    pub delay: usize,
    pub doppler: i64,
}

impl ChannelPath {
    pub fn new(gain: C64, delay: usize, doppler: i64) -> Self {
        ChannelPath {
            gain,
            delay,
            doppler,
        }
    }

    /// Doppler index wrapped into `0..N`.
    pub fn doppler_bin(&self, n: usize) -> usize {
        self.doppler.rem_euclid(n as i64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    paths: Vec<ChannelPath>,
    delay_set: Vec<usize>,
    k_max: usize,
}

impl ChannelModel {
    pub fn new(paths: Vec<ChannelPath>) -> Self {
        let mut delay_set: Vec<usize> = paths.iter().map(|p| p.delay).collect();
        delay_set.sort_unstable();
        delay_set.dedup();
        let k_max = paths
            .iter()
            .map(|p| p.doppler.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        ChannelModel {
            paths,
            delay_set,
            k_max,
        }
    }

    /// Single unit path with no delay or Doppler.
    pub fn identity() -> Self {
        Self::new(vec![ChannelPath::new(C64::new(1.0, 0.0), 0, 0)])
    }

    pub fn paths(&self) -> &[ChannelPath] {
        &self.paths
    }

    /// Unique delay taps, ascending.
    pub fn delay_set(&self) -> &[usize] {
        &self.delay_set
    }

    /// L, the number of unique delay taps.
    pub fn num_delays(&self) -> usize {
        self.delay_set.len()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn max_delay(&self) -> usize {
        self.delay_set.last().copied().unwrap_or(0)
    }

    pub fn power(&self) -> f64 {
        self.paths.iter().map(|p| p.gain.norm_sqr()).sum()
    }

    /// Rescales gains so that `sum |h_i|^2 = 1`.
    pub fn normalized(mut self) -> Self {
        let p = self.power();
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            self.paths.iter_mut().for_each(|path| path.gain *= s);
        }
        self
    }

    pub fn scaled(mut self, c: C64) -> Self {
        self.paths.iter_mut().for_each(|path| path.gain *= c);
        self
    }

    /// Checks the under-spread conditions `l_i <= l_max` and `|k_i| < N/2`.
    pub fn validate(&self, cfg: &FrameConfig) -> Result<()> {
        let half = cfg.doppler_bins() / 2;
        for p in &self.paths {
            if p.delay > cfg.l_max() {
                return Err(Error::DelayOutOfRange {
                    delay: p.delay,
                    l_max: cfg.l_max(),
                });
            }
            if p.doppler.unsigned_abs() as usize >= half {
                return Err(Error::DopplerOutOfRange {
                    doppler: p.doppler,
                    half,
                });
            }
        }
        Ok(())
    }

    /// Loads a channel from a JSON list of
    /// `{gain_re, gain_im, delay_tap, doppler_tap}` objects.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ChannelFile(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let entries: Vec<PathEntry> =
            serde_json::from_str(text).map_err(|e| Error::ChannelFile(e.to_string()))?;
        if entries.is_empty() {
            return Err(Error::ChannelFile("no paths".into()));
        }
        Ok(Self::new(
            entries
                .into_iter()
                .map(|e| {
                    ChannelPath::new(C64::new(e.gain_re, e.gain_im), e.delay_tap, e.doppler_tap)
                })
                .collect(),
        ))
    }

    pub fn to_json_string(&self) -> String {
        let entries: Vec<PathEntry> = self
            .paths
            .iter()
            .map(|p| PathEntry {
                gain_re: p.gain.re,
                gain_im: p.gain.im,
                delay_tap: p.delay,
                doppler_tap: p.doppler,
            })
            .collect();
        serde_json::to_string_pretty(&entries).expect("plain data serialises")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathEntry {
    gain_re: f64,
    gain_im: f64,
    delay_tap: usize,
    doppler_tap: i64,
}

/// Rectangular-pulse phase corrections `phi_m(k)` for `m in 0..M`,
/// `k in 0..N`: `z^{k m}` for `k < N/2`, `z^{-(N-k) m}` otherwise.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    cols: usize,
    data: Vec<C64>,
}

impl PhaseTable {
    pub fn new(cfg: &FrameConfig) -> Self {
        let (m_bins, n_bins) = (cfg.delay_bins(), cfg.doppler_bins());
        let mut data = Vec::with_capacity(m_bins * n_bins);
        for m in 0..m_bins as i64 {
            for k in 0..n_bins as i64 {
                let signed = if k < n_bins as i64 / 2 {
                    k
                } else {
                    k - n_bins as i64
                };
                data.push(cfg.z_pow(signed * m));
            }
        }
        PhaseTable { cols: n_bins, data }
    }

    pub fn get(&self, m: usize, k: usize) -> C64 {
        self.data[m * self.cols + k]
    }

    /// Vector `phi_m`.
    pub fn row(&self, m: usize) -> &[C64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delay_set_sorted_unique() {
        let ch = ChannelModel::new(vec![
            ChannelPath::new(C64::new(0.5, 0.0), 3, 1),
            ChannelPath::new(C64::new(0.5, 0.0), 0, -2),
            ChannelPath::new(C64::new(0.5, 0.0), 3, 2),
        ]);
        assert_eq!(ch.delay_set(), &[0, 3]);
        assert_eq!(ch.num_delays(), 2);
        assert_eq!(ch.k_max(), 2);
        assert!((ch.clone().normalized().power() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation_enforces_underspread() {
        let cfg = FrameConfig::new(16, 8, 15e3, 4).unwrap();
        let ok = ChannelModel::new(vec![ChannelPath::new(C64::new(1.0, 0.0), 4, -3)]);
        assert!(ok.validate(&cfg).is_ok());
        let late = ChannelModel::new(vec![ChannelPath::new(C64::new(1.0, 0.0), 5, 0)]);
        assert!(matches!(
            late.validate(&cfg),
            Err(Error::DelayOutOfRange { .. })
        ));
        let fast = ChannelModel::new(vec![ChannelPath::new(C64::new(1.0, 0.0), 0, 4)]);
        assert!(matches!(
            fast.validate(&cfg),
            Err(Error::DopplerOutOfRange { .. })
        ));
    }

    #[test]
    fn phase_table_properties() {
        let cfg = FrameConfig::new(16, 8, 15e3, 4).unwrap();
        let phi = PhaseTable::new(&cfg);
        for m in 0..16 {
            assert_eq!(phi.get(m, 0), C64::new(1.0, 0.0));
            for k in 0..8 {
                assert!((phi.get(m, k).norm() - 1.0).abs() < 1e-14);
                assert!((phi.get(0, k) - C64::new(1.0, 0.0)).norm() < 1e-15);
            }
        }
        // k >= N/2 uses the negative frequency.
        let z = cfg.z();
        assert!((phi.get(3, 6) - z.powi(-(2 * 3))).norm() < 1e-12);
        assert!((phi.get(3, 2) - z.powi(2 * 3)).norm() < 1e-12);
    }

    #[test]
    fn json_roundtrip_and_errors() {
        let text = r#"[{"gain_re": 0.6, "gain_im": 0.0, "delay_tap": 0, "doppler_tap": 1},
                       {"gain_re": 0.0, "gain_im": 0.8, "delay_tap": 2, "doppler_tap": -1}]"#;
        let ch = ChannelModel::from_json_str(text).unwrap();
        assert_eq!(ch.paths().len(), 2);
        assert_eq!(ch.paths()[1].doppler, -1);
        let again = ChannelModel::from_json_str(&ch.to_json_string()).unwrap();
        assert_eq!(again, ch);
        assert!(ChannelModel::from_json_str("[]").is_err());
        assert!(ChannelModel::from_json_str(r#"[{"gain_re": 1}]"#).is_err());
        assert!(ChannelModel::from_json_file("/nonexistent/channel.json").is_err());
    }
}
