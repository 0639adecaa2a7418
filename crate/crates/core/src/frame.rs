//! Frame geometry, Gray QAM, delay-Doppler grid mapping and the ML slicer.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

/// Geometry of one OTFS frame.
///
/// `M` delay bins by `N` Doppler bins, with the last `l_max` delay rows held
/// at zero so that rows `0..M'` carry data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameConfig {
    delay_bins: usize,
    doppler_bins: usize,
    subcarrier_spacing: f64,
    symbol_time: f64,
    l_max: usize,
    z: C64,
}

impl FrameConfig {
    /// `delay_bins` (M) and `doppler_bins` (N) must be powers of two, at
    /// least 2; `1 <= l_max < M`. The symbol time is `1 / subcarrier_spacing`.
    pub fn new(
        delay_bins: usize,
        doppler_bins: usize,
        subcarrier_spacing: f64,
        l_max: usize,
    ) -> Result<Self> {
        for (name, v) in [("M", delay_bins), ("N", doppler_bins)] {
            if v < 2 || !v.is_power_of_two() {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} must be a power of two >= 2"
                )));
            }
        }
        if l_max == 0 || l_max >= delay_bins {
            return Err(Error::InvalidConfig(format!(
                "l_max = {l_max} must satisfy 1 <= l_max < M = {delay_bins}"
            )));
        }
        if !(subcarrier_spacing.is_finite() && subcarrier_spacing > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "subcarrier spacing {subcarrier_spacing} must be positive"
            )));
        }
        let z = C64::from_polar(1.0, 2.0 * PI / (delay_bins * doppler_bins) as f64);
        Ok(FrameConfig {
            delay_bins,
            doppler_bins,
            subcarrier_spacing,
            symbol_time: 1.0 / subcarrier_spacing,
            l_max,
            z,
        })
    }

    /// M.
    pub fn delay_bins(&self) -> usize {
        self.delay_bins
    }

    /// N.
    pub fn doppler_bins(&self) -> usize {
        self.doppler_bins
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    /// M' = M - l_max, the number of data-bearing delay rows.
    pub fn payload_rows(&self) -> usize {
        self.delay_bins - self.l_max
    }

    /// Number of data symbols per frame, M' * N.
    pub fn payload_len(&self) -> usize {
        self.payload_rows() * self.doppler_bins
    }

    pub fn subcarrier_spacing(&self) -> f64 {
        self.subcarrier_spacing
    }

    pub fn symbol_time(&self) -> f64 {
        self.symbol_time
    }

    /// Time-domain sampling rate, M * delta_f.
    pub fn sample_rate(&self) -> f64 {
        self.delay_bins as f64 * self.subcarrier_spacing
    }

    /// Unit phasor `z = exp(j 2 pi / (M N))`.
    pub fn z(&self) -> C64 {
        self.z
    }

    /// `z^e` for a signed exponent, evaluated without repeated products.
    pub fn z_pow(&self, e: i64) -> C64 {
        let mn = (self.delay_bins * self.doppler_bins) as i64;
        C64::from_polar(1.0, 2.0 * PI * e.rem_euclid(mn) as f64 / mn as f64)
    }
}

/// Square Gray-labelled QAM constellation with unit average energy.
///
/// Point `i` carries the label whose bits, most significant first, spell
/// `i`. Even bit positions drive the in-phase level and odd positions the
/// quadrature level, so `00 -> (1 + j)/sqrt(2)` for 4-QAM.
#[derive(Debug, Clone, PartialEq)]
pub struct QamAlphabet {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<C64>,
}

impl QamAlphabet {
    pub fn new(order: usize) -> Result<Self> {
        let bps = order.trailing_zeros() as usize;
        if order < 4 || !order.is_power_of_two() || !bps.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "QAM order {order} must be a square power of two (4, 16, 64, ...)"
            )));
        }
        let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let points = (0..order)
            .map(|idx| {
                let bits: Vec<u8> = (0..bps)
                    .map(|b| ((idx >> (bps - 1 - b)) & 1) as u8)
                    .collect();
                let i_bits: Vec<u8> = bits.iter().step_by(2).copied().collect();
                let q_bits: Vec<u8> = bits.iter().skip(1).step_by(2).copied().collect();
                C64::new(gray_level(&i_bits), gray_level(&q_bits)) / scale
            })
            .collect();
        Ok(QamAlphabet {
            order,
            bits_per_symbol: bps,
            points,
        })
    }

    pub fn qpsk() -> Self {
        Self::new(4).expect("4-QAM is valid")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    /// Bit `b` (0 = most significant) of the label of point `idx`.
    pub fn label_bit(&self, idx: usize, b: usize) -> u8 {
        ((idx >> (self.bits_per_symbol - 1 - b)) & 1) as u8
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest_index(&self, c: C64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (j, p) in self.points.iter().enumerate() {
            let d = (p - c).norm_sqr();
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        best
    }

    pub fn nearest(&self, c: C64) -> C64 {
        self.points[self.nearest_index(c)]
    }
}

// Per-dimension Gray level: first bit picks the sign, the rest fold the
// magnitude so that neighbouring levels differ in a single bit.
fn gray_level(bits: &[u8]) -> f64 {
    let sign = 1.0 - 2.0 * f64::from(bits[0]);
    sign * gray_magnitude(&bits[1..])
}

fn gray_magnitude(bits: &[u8]) -> f64 {
    match bits.split_first() {
        None => 1.0,
        Some((&b, rest)) => {
            (1u64 << bits.len()) as f64 - (1.0 - 2.0 * f64::from(b)) * gray_magnitude(rest)
        }
    }
}

/// Maps a bit sequence onto constellation points, `log2|Q|` bits per point.
pub fn qam_modulate(bits: &[u8], alphabet: &QamAlphabet) -> Result<Vec<C64>> {
    let bps = alphabet.bits_per_symbol();
    if !bits.len().is_multiple_of(bps) {
        return Err(Error::BitCount {
            bits: bits.len(),
            bits_per_symbol: bps,
        });
    }
    Ok(bits
        .chunks_exact(bps)
        .map(|chunk| {
            let idx = chunk
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1));
            alphabet.points[idx]
        })
        .collect())
}

/// Hard demapping: nearest point, then its label.
pub fn qam_demodulate(symbols: &[C64], alphabet: &QamAlphabet) -> Vec<u8> {
    let bps = alphabet.bits_per_symbol();
    let mut bits = Vec::with_capacity(symbols.len() * bps);
    for &s in symbols {
        let idx = alphabet.nearest_index(s);
        bits.extend((0..bps).map(|b| alphabet.label_bit(idx, b)));
    }
    bits
}

/// Symbol-wise ML decision, `argmin_a |a - c(n)|`.
pub fn ml_slice(c: &[C64], alphabet: &QamAlphabet) -> Vec<C64> {
    c.iter().map(|&v| alphabet.nearest(v)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridRole {
    Transmit,
    Receive,
}

/// M x N complex grid stored row-major, one delay row per `N`-length slice.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayDopplerGrid {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
    role: GridRole,
}

impl DelayDopplerGrid {
    pub fn zeros(cfg: &FrameConfig, role: GridRole) -> Self {
        DelayDopplerGrid {
            rows: cfg.delay_bins(),
            cols: cfg.doppler_bins(),
            data: vec![C64::default(); cfg.delay_bins() * cfg.doppler_bins()],
            role,
        }
    }

    /// Wraps row-major data as a transmit grid, rejecting nonzero null rows.
    pub fn transmit(cfg: &FrameConfig, data: Vec<C64>) -> Result<Self> {
        let grid = Self::with_data(cfg, data, GridRole::Transmit)?;
        grid.check_null_rows(cfg)?;
        Ok(grid)
    }

    /// Wraps row-major data as a received grid (no null-row requirement).
    pub fn received(cfg: &FrameConfig, data: Vec<C64>) -> Result<Self> {
        Self::with_data(cfg, data, GridRole::Receive)
    }

    /// Transmit-role grid without the null-row check; only the dense
    /// reference needs frames that break the guard.
    pub fn unchecked(cfg: &FrameConfig, data: Vec<C64>) -> Result<Self> {
        Self::with_data(cfg, data, GridRole::Transmit)
    }

    fn with_data(cfg: &FrameConfig, data: Vec<C64>, role: GridRole) -> Result<Self> {
        let (rows, cols) = (cfg.delay_bins(), cfg.doppler_bins());
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{rows}x{cols} = {}", rows * cols),
                got: data.len().to_string(),
            });
        }
        Ok(DelayDopplerGrid {
            rows,
            cols,
            data,
            role,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn role(&self) -> GridRole {
        self.role
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, m: usize, n: usize) -> C64 {
        self.data[m * self.cols + n]
    }

    /// Row vector `x_m = [X(m,0) .. X(m,N-1)]`.
    pub fn row(&self, m: usize) -> &[C64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn row_mut(&mut self, m: usize) -> &mut [C64] {
        &mut self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn matches(&self, cfg: &FrameConfig) -> bool {
        self.rows == cfg.delay_bins() && self.cols == cfg.doppler_bins()
    }

    pub fn check_null_rows(&self, cfg: &FrameConfig) -> Result<()> {
        let first_null = cfg.payload_rows();
        for m in first_null..self.rows {
            if self.row(m).iter().any(|v| *v != C64::default()) {
                return Err(Error::NullRowViolation { row: m, first_null });
            }
        }
        Ok(())
    }

    /// Payload symbols of rows `0..M'`, delay-major.
    pub fn extract_payload(&self, cfg: &FrameConfig) -> Vec<C64> {
        self.data[..cfg.payload_len()].to_vec()
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Places `(M - l_max) * N` symbols delay-major into rows `0..M'` and zeroes
/// the remaining `l_max` rows.
pub fn map_to_grid(symbols: &[C64], cfg: &FrameConfig) -> Result<DelayDopplerGrid> {
    if symbols.len() != cfg.payload_len() {
        return Err(Error::SymbolCount {
            expected: cfg.payload_len(),
            got: symbols.len(),
        });
    }
    let mut grid = DelayDopplerGrid::zeros(cfg, GridRole::Transmit);
    grid.data[..symbols.len()].copy_from_slice(symbols);
    Ok(grid)
}
