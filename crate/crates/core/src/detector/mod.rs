//! Iterative maximal-ratio-combining rake detector.
//!
//! Each transmitted row `x_m` reaches the receiver on every delay branch
//! `l` as `K_{m+l,l} x_m` inside `y_{m+l}`. A pass visits rows in ascending
//! order; for each row it strips the other rows' contributions from every
//! branch, combines the branches with weights `K^H` and normalises by
//! `R_m = sum_l K^H K`, then slices. Decisions feed back immediately into the
//! cached reconstruction `y_hat`, so later rows in the same pass already see
//! the updated estimates.
//!
//! All circulant algebra is evaluated on N-point spectra. [`OpCounts`]
//! tallies complex multiplications by phase so the per-pass cost
//! `N * M' * (3L + 1)` can be checked exactly.

mod llr;
mod mrc;

use serde::{Deserialize, Serialize};

use crate::channel::DopplerSpreadTable;
use crate::frame::QamAlphabet;
use crate::{Error, Result, C64};

pub use llr::{soft_llrs, LLR_MAX};
pub use mrc::{init_y_hat, precompute_r, DetectorState, Refresh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// `x_hat = 0` for every row.
    Zero,
    /// Single-tap time-frequency MMSE estimate built from the table.
    TfMmse,
    /// Caller-supplied estimate.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Number of full passes (S).
    pub iterations: usize,
    pub init: InitMode,
    /// Added to every combiner spectrum bin before division.
    pub epsilon: f64,
    pub count_ops: bool,
    /// Noise standard deviation, used by the TF-MMSE initialiser.
    pub noise_std: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            iterations: 10,
            init: InitMode::Zero,
            epsilon: 1e-12,
            count_ops: true,
            noise_std: 0.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon = {} must be finite and >= 0",
                self.epsilon
            )));
        }
        if self.noise_std.is_nan() || self.noise_std < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "noise_std = {} must be >= 0",
                self.noise_std
            )));
        }
        Ok(())
    }
}

/// Complex-multiplication tallies, split by phase.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    /// Branch extraction, combining, normalisation and cache updates inside
    /// passes: `N * M' * S * (3L + 1)`.
    pub iterative: u64,
    /// Initial `y_hat` evaluation over all `M' L` branch vectors, `L`
    /// circulant products each: `N * M' * L^2`.
    pub setup_products: u64,
    /// Setup transforms (K spectra, branch received rows, initial estimates)
    /// at `N log2 N` each: `N * M' * (2L + 1) * log2 N`.
    pub setup_transforms: u64,
    /// Time-frequency initial estimate: `NM * (3 + 3 log2(NM))`.
    pub tf_init: u64,
    /// Per-row inverse/forward transforms inside passes (slicing happens in
    /// the time domain).
    pub pass_transforms: u64,
    /// Real squared magnitudes summed into the combiner spectra, `N M' L`.
    pub combiner_squares: u64,
    /// Cache refreshes after externally installed estimates (turbo feedback).
    pub feedback: u64,
}

impl OpCounts {
    pub fn merge(&mut self, other: &OpCounts) {
        self.iterative += other.iterative;
        self.setup_products += other.setup_products;
        self.setup_transforms += other.setup_transforms;
        self.tf_init += other.tf_init;
        self.pass_transforms += other.pass_transforms;
        self.combiner_squares += other.combiner_squares;
        self.feedback += other.feedback;
    }
}

/// Output of [`detect`].
#[derive(Debug, Clone)]
pub struct Detection {
    /// Sliced estimates for rows `0..M'`, delay-major.
    pub symbols: Vec<C64>,
    /// Combiner outputs `c_m` of the final pass (the sliced initial estimate
    /// when no pass ran).
    pub combined: Vec<C64>,
    /// Combiner spectra `R_m`, row-major `M' x N`.
    pub r_spectra: Vec<f64>,
    pub counts: OpCounts,
}

/// Starting estimate for rows `0..M'` under `cfg.init`, with the
/// multiplications it cost. `None` means all-zero.
pub fn initial_estimate(
    received: &crate::frame::DelayDopplerGrid,
    table: &DopplerSpreadTable,
    cfg: &DetectorConfig,
    x0: Option<&[C64]>,
) -> Result<(Option<Vec<C64>>, u64)> {
    match cfg.init {
        InitMode::Zero => Ok((None, 0)),
        InitMode::External => Ok((Some(x0.ok_or(Error::MissingInitialEstimate)?.to_vec()), 0)),
        InitMode::TfMmse => {
            let frame = table.config();
            let h_dd = crate::tf::IdealDdChannel::from_table(table);
            let est = crate::tf::mmse_tf_estimate(received, &h_dd, cfg.noise_std)?;
            Ok((
                Some(est.extract_payload(frame)),
                crate::tf::tf_estimate_cost(frame),
            ))
        }
    }
}

/// Runs `cfg.iterations` passes from the configured initial estimate.
///
/// With `InitMode::External` the estimate comes from `x0` (length `M' N`);
/// `InitMode::TfMmse` computes it from the table and `cfg.noise_std`.
pub fn detect(
    received: &crate::frame::DelayDopplerGrid,
    table: &DopplerSpreadTable,
    alphabet: &QamAlphabet,
    cfg: &DetectorConfig,
    x0: Option<&[C64]>,
) -> Result<Detection> {
    cfg.validate()?;
    let (initial, tf_counts) = initial_estimate(received, table, cfg, x0)?;
    let mut state = DetectorState::new(
        received,
        table,
        cfg.epsilon,
        cfg.count_ops,
        initial.as_deref(),
    )?;
    for _ in 0..cfg.iterations {
        state.iterate(alphabet)?;
    }
    let mut counts = state.counts();
    if cfg.count_ops {
        counts.tf_init = tf_counts;
    }
    let (symbols, combined) = if cfg.iterations == 0 {
        let sliced = crate::frame::ml_slice(state.estimates(), alphabet);
        (sliced, state.estimates().to_vec())
    } else {
        (state.estimates().to_vec(), state.combined().to_vec())
    };
    Ok(Detection {
        symbols,
        combined,
        r_spectra: state.r_spectra().to_vec(),
        counts,
    })
}
