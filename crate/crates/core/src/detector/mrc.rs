use super::OpCounts;
use crate::channel::DopplerSpreadTable;
use crate::fourier::fft_cost;
use crate::frame::{DelayDopplerGrid, QamAlphabet};
use crate::{Error, Result, C64};

/// Combiner spectra `R_m(k) = sum_l |Lambda_{m+l,l}(k)|^2`, row-major `M' x N`.
pub fn precompute_r(table: &DopplerSpreadTable) -> Vec<f64> {
    let cfg = table.config();
    let n = cfg.doppler_bins();
    let mut r = vec![0.0; cfg.payload_rows() * n];
    for (m, row) in r.chunks_exact_mut(n).enumerate() {
        for li in 0..table.num_delays() {
            row.iter_mut()
                .zip(table.spectrum(m, li))
                .for_each(|(acc, lam)| *acc += lam.norm_sqr());
        }
    }
    r
}

/// Spectra of `y_hat_r = sum_l K_{r,l} x_hat_{r-l}` for every received row
/// `r in 0..M`, from time-domain estimates of rows `0..M'`.
pub fn init_y_hat(estimates: &[C64], table: &DopplerSpreadTable) -> Vec<C64> {
    let cfg = table.config();
    let n = cfg.doppler_bins();
    let plan = table.plan();
    let mut scratch = plan.scratch();
    let mut spectra = estimates.to_vec();
    for row in spectra.chunks_exact_mut(n) {
        plan.forward(row, &mut scratch);
    }
    let mut y_hat = vec![C64::default(); cfg.delay_bins() * n];
    branch_reconstruct(&spectra, table, &mut y_hat);
    y_hat
}

/// Evaluates `y_hat_{m+l}` for every branch `(m, l)`, `m < M'`, with all `L`
/// circulant products per branch. Terms whose source row lies outside
/// `0..M'` multiply a null row and contribute nothing. Returns the number of
/// circulant products evaluated, `M' L^2`.
fn branch_reconstruct(est_spec: &[C64], table: &DopplerSpreadTable, y_hat: &mut [C64]) -> u64 {
    let cfg = table.config();
    let n = cfg.doppler_bins();
    let mp = cfg.payload_rows();
    let delays = table.delays();
    let mut products = 0u64;
    let mut acc = vec![C64::default(); n];
    for m in 0..mp {
        for &l in delays {
            let r = m + l;
            acc.iter_mut().for_each(|v| *v = C64::default());
            for (lj, &lp) in delays.iter().enumerate() {
                products += 1;
                if r < lp || r - lp >= mp {
                    continue;
                }
                let src = r - lp;
                let xs = &est_spec[src * n..(src + 1) * n];
                acc.iter_mut()
                    .zip(table.spectrum(src, lj))
                    .zip(xs)
                    .for_each(|((a, lam), x)| *a += lam * x);
            }
            y_hat[r * n..(r + 1) * n].copy_from_slice(&acc);
        }
    }
    products
}

/// How installed estimates propagate into the `y_hat` cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Refresh {
    /// Per-row difference updates through the branch circulants.
    #[default]
    Incremental,
    /// Full branch re-evaluation.
    FromScratch,
}

/// Per-frame detector state. Everything except the sliced time-domain
/// estimates and combiner outputs is kept in the Fourier domain.
#[derive(Debug, Clone)]
pub struct DetectorState<'t> {
    table: &'t DopplerSpreadTable,
    epsilon: f64,
    count: bool,
    received_spec: Vec<C64>,
    est: Vec<C64>,
    est_spec: Vec<C64>,
    y_hat: Vec<C64>,
    r_spec: Vec<f64>,
    combined: Vec<C64>,
    counts: OpCounts,
}

impl<'t> DetectorState<'t> {
    /// Transforms the received rows and initial estimates, builds the
    /// combiner spectra and the `y_hat` cache. `initial` defaults to zero.
    pub fn new(
        received: &DelayDopplerGrid,
        table: &'t DopplerSpreadTable,
        epsilon: f64,
        count_ops: bool,
        initial: Option<&[C64]>,
    ) -> Result<Self> {
        let cfg = table.config();
        let (n, mp) = (cfg.doppler_bins(), cfg.payload_rows());
        if !received.matches(cfg) {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", cfg.delay_bins(), n),
                got: format!("{}x{}", received.rows(), received.cols()),
            });
        }
        let est = match initial {
            Some(x0) if x0.len() != mp * n => {
                return Err(Error::SymbolCount {
                    expected: mp * n,
                    got: x0.len(),
                })
            }
            Some(x0) => x0.to_vec(),
            None => vec![C64::default(); mp * n],
        };
        let plan = table.plan();
        let mut scratch = plan.scratch();
        let fft = fft_cost(n);
        let big_l = table.num_delays();
        let mut counts = OpCounts::default();

        // Received spectra, one transform per branch (m, l).
        let mut received_spec = vec![C64::default(); cfg.delay_bins() * n];
        let mut transforms = table.transforms();
        for m in 0..mp {
            for &l in table.delays() {
                let r = m + l;
                let slot = &mut received_spec[r * n..(r + 1) * n];
                slot.copy_from_slice(received.row(r));
                plan.forward(slot, &mut scratch);
                transforms += 1;
            }
        }
        let mut est_spec = est.clone();
        for row in est_spec.chunks_exact_mut(n) {
            plan.forward(row, &mut scratch);
            transforms += 1;
        }

        let mut y_hat = vec![C64::default(); cfg.delay_bins() * n];
        let products = branch_reconstruct(&est_spec, table, &mut y_hat);
        let r_spec = precompute_r(table);

        if count_ops {
            counts.setup_transforms = transforms * fft;
            counts.setup_products = products * n as u64;
            counts.combiner_squares = (mp * big_l * n) as u64;
        }
        Ok(DetectorState {
            table,
            epsilon,
            count: count_ops,
            received_spec,
            combined: est.clone(),
            est,
            est_spec,
            y_hat,
            r_spec,
            counts,
        })
    }

    /// One pass over rows `0..M'` in ascending order.
    pub fn iterate(&mut self, alphabet: &QamAlphabet) -> Result<()> {
        let table = self.table;
        let cfg = table.config();
        let (n, mp) = (cfg.doppler_bins(), cfg.payload_rows());
        let plan = table.plan();
        let mut scratch = plan.scratch();
        let delays = table.delays();
        let mut g = vec![C64::default(); n];
        let mut delta = vec![C64::default(); n];

        for m in 0..mp {
            let xf_old = &self.est_spec[m * n..(m + 1) * n];
            g.iter_mut().for_each(|v| *v = C64::default());
            for (li, &l) in delays.iter().enumerate() {
                let r = m + l;
                let lam = table.spectrum(m, li);
                let y = &self.received_spec[r * n..(r + 1) * n];
                let yh = &self.y_hat[r * n..(r + 1) * n];
                for k in 0..n {
                    // b = y - y_hat + K x_m, then g += K^H b
                    let b = y[k] - yh[k] + lam[k] * xf_old[k];
                    g[k] += lam[k].conj() * b;
                }
            }
            let r_row = &self.r_spec[m * n..(m + 1) * n];
            for k in 0..n {
                let den = r_row[k] + self.epsilon;
                if den == 0.0 {
                    return Err(Error::SingularCombiner { row: m, bin: k });
                }
                g[k] /= den;
            }
            plan.inverse(&mut g, &mut scratch);
            self.combined[m * n..(m + 1) * n].copy_from_slice(&g);

            let est_row = &mut self.est[m * n..(m + 1) * n];
            for (e, c) in est_row.iter_mut().zip(&g) {
                *e = alphabet.nearest(*c);
            }
            delta.copy_from_slice(est_row);
            plan.forward(&mut delta, &mut scratch);
            let xf = &mut self.est_spec[m * n..(m + 1) * n];
            for (d, x) in delta.iter_mut().zip(xf.iter_mut()) {
                let new = *d;
                *d = new - *x;
                *x = new;
            }
            for (li, &l) in delays.iter().enumerate() {
                let r = m + l;
                self.y_hat[r * n..(r + 1) * n]
                    .iter_mut()
                    .zip(table.spectrum(m, li))
                    .zip(&delta)
                    .for_each(|((yh, lam), d)| *yh += lam * d);
            }
        }
        if self.count {
            let big_l = delays.len() as u64;
            self.counts.iterative += mp as u64 * n as u64 * (3 * big_l + 1);
            self.counts.pass_transforms += 2 * mp as u64 * fft_cost(n);
        }
        Ok(())
    }

    /// Replaces the current estimates (length `M' N`) and brings the cache
    /// in line with them.
    pub fn install(&mut self, estimates: &[C64], refresh: Refresh) -> Result<()> {
        let table = self.table;
        let cfg = table.config();
        let (n, mp) = (cfg.doppler_bins(), cfg.payload_rows());
        if estimates.len() != mp * n {
            return Err(Error::SymbolCount {
                expected: mp * n,
                got: estimates.len(),
            });
        }
        let plan = table.plan();
        let mut scratch = plan.scratch();
        let fft = fft_cost(n);
        self.est.copy_from_slice(estimates);
        let mut fresh = estimates.to_vec();
        for row in fresh.chunks_exact_mut(n) {
            plan.forward(row, &mut scratch);
        }
        let mut ops = mp as u64 * fft;
        match refresh {
            Refresh::Incremental => {
                for m in 0..mp {
                    for (li, &l) in table.delays().iter().enumerate() {
                        let r = m + l;
                        let lam = table.spectrum(m, li);
                        for k in 0..n {
                            let d = fresh[m * n + k] - self.est_spec[m * n + k];
                            self.y_hat[r * n + k] += lam[k] * d;
                        }
                    }
                }
                ops += (mp * table.num_delays() * n) as u64;
                self.est_spec = fresh;
            }
            Refresh::FromScratch => {
                self.est_spec = fresh;
                let products = branch_reconstruct(&self.est_spec, table, &mut self.y_hat);
                ops += products * n as u64;
            }
        }
        if self.count {
            self.counts.feedback += ops;
        }
        Ok(())
    }

    /// Current estimates for rows `0..M'`, delay-major.
    pub fn estimates(&self) -> &[C64] {
        &self.est
    }

    /// Combiner outputs `c_m` from the most recent pass.
    pub fn combined(&self) -> &[C64] {
        &self.combined
    }

    pub fn r_spectra(&self) -> &[f64] {
        &self.r_spec
    }

    /// Cached `y_hat` spectra for received rows `0..M`.
    pub fn y_hat_spectra(&self) -> &[C64] {
        &self.y_hat
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }
}
