use super::{ChannelModel, PhaseTable};
use crate::fourier::{fft_cost, FftPair};
use crate::frame::FrameConfig;
use crate::{Result, C64};

/// Doppler spread vectors and circulant spectra for one channel realisation.
///
/// For each unique delay `l` the table keeps the ideal-pulse vector `nu_l`
/// (coincident paths summed). Spectra are stored per data row `m in 0..M'`
/// and delay: entry `(m, l)` is the N-point DFT of `nu_{m+l,l} = nu_l * phi_m`,
/// i.e. the eigenvalues of the circulant `K_{m+l,l}` through which row `x_m`
/// reaches received row `y_{m+l}`.
#[derive(Debug, Clone)]
pub struct DopplerSpreadTable {
    cfg: FrameConfig,
    delays: Vec<usize>,
    base: Vec<Vec<C64>>,
    phases: PhaseTable,
    spectra: Vec<C64>,
    plan: FftPair,
}

impl DopplerSpreadTable {
    pub fn build(model: &ChannelModel, cfg: &FrameConfig) -> Result<Self> {
        model.validate(cfg)?;
        let n = cfg.doppler_bins();
        let delays = model.delay_set().to_vec();
        let mut base = vec![vec![C64::default(); n]; delays.len()];
        for p in model.paths() {
            let li = delays
                .binary_search(&p.delay)
                .expect("delay set covers paths");
            base[li][p.doppler_bin(n)] += p.gain;
        }
        let phases = PhaseTable::new(cfg);
        let plan = FftPair::new(n);
        let mut scratch = plan.scratch();
        let mp = cfg.payload_rows();
        let big_l = delays.len();
        let mut spectra = vec![C64::default(); mp * big_l * n];
        for m in 0..mp {
            let phi = phases.row(m);
            for (li, nu) in base.iter().enumerate() {
                let off = (m * big_l + li) * n;
                let slot = &mut spectra[off..off + n];
                slot.iter_mut()
                    .zip(nu.iter().zip(phi))
                    .for_each(|(s, (a, b))| *s = a * b);
                plan.forward(slot, &mut scratch);
            }
        }
        Ok(DopplerSpreadTable {
            cfg: *cfg,
            delays,
            base,
            phases,
            spectra,
            plan,
        })
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    /// The unique delay taps `L`, ascending.
    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn num_delays(&self) -> usize {
        self.delays.len()
    }

    pub fn plan(&self) -> &FftPair {
        &self.plan
    }

    pub fn phases(&self) -> &PhaseTable {
        &self.phases
    }

    /// `nu_l` for the `li`-th unique delay.
    pub fn base_vector(&self, li: usize) -> &[C64] {
        &self.base[li]
    }

    /// `nu_{r,l}` for received row `r` and the `li`-th delay; the zero vector
    /// when `r < l`.
    pub fn spread_vector(&self, r: usize, li: usize) -> Vec<C64> {
        let l = self.delays[li];
        if r < l {
            return vec![C64::default(); self.cfg.doppler_bins()];
        }
        self.base[li]
            .iter()
            .zip(self.phases.row(r - l))
            .map(|(a, b)| a * b)
            .collect()
    }

    /// Spectrum of `K_{m+l,l}` for data row `m < M'` and delay index `li`.
    #[inline]
    pub fn spectrum(&self, m: usize, li: usize) -> &[C64] {
        let n = self.cfg.doppler_bins();
        let off = (m * self.delays.len() + li) * n;
        &self.spectra[off..off + n]
    }

    /// Number of N-point transforms spent building the spectra (`M' * L`).
    pub fn transforms(&self) -> u64 {
        (self.cfg.payload_rows() * self.delays.len()) as u64
    }

    /// `transforms()` expressed in complex multiplications.
    pub fn transform_multiplies(&self) -> u64 {
        self.transforms() * fft_cost(self.cfg.doppler_bins())
    }
}
