use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{DetectorKind, SimSpec};
use super::{frame_seed, splitmix64};
use crate::channel::{
    apply_channel_with_rng, generate_eva_with_rng, ChannelModel, DopplerSpreadTable,
};
use crate::coding::{turbo_detect, IdentityDecoder, Interleaver, TurboConfig};
use crate::detector::{detect, DetectorConfig, InitMode};
use crate::fourier::fft_cost;
use crate::frame::{map_to_grid, qam_modulate};
use crate::{Error, Result};

/// Closed-form multiplication counts for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityTerms {
    /// `N M' S (3L + 1)`
    pub iterative: u64,
    /// `N M' L^2`
    pub setup_products: u64,
    /// `N M' (2L + 1) log2 N`
    pub setup_transforms: u64,
    /// `N M (3 + 3 log2(NM))`, only with the TF initial estimate.
    pub tf_init: u64,
}

impl ComplexityTerms {
    pub fn new(n: usize, m: usize, l_max: usize, l: usize, s: usize, with_tf_init: bool) -> Self {
        let (n64, mp, l64) = (n as u64, (m - l_max) as u64, l as u64);
        let nm = (n * m) as u64;
        ComplexityTerms {
            iterative: n64 * mp * s as u64 * (3 * l64 + 1),
            setup_products: n64 * mp * l64 * l64,
            setup_transforms: mp * (2 * l64 + 1) * fft_cost(n),
            tf_init: if with_tf_init {
                nm * (3 + 3 * u64::from((n * m).trailing_zeros()))
            } else {
                0
            },
        }
    }

    pub fn total(&self) -> u64 {
        self.iterative + self.setup_products + self.setup_transforms + self.tf_init
    }
}

/// Formula and instrumented counts for one detector on one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityRecord {
    pub detector: String,
    pub doppler_bins: usize,
    pub delay_bins: usize,
    pub l_max: usize,
    pub num_delays: usize,
    pub passes: usize,
    pub formula: ComplexityTerms,
    pub measured: ComplexityTerms,
}

impl ComplexityRecord {
    pub fn matches(&self) -> bool {
        self.formula == self.measured
    }
}

/// Runs each MRC-family detector once on the first frame of the campaign
/// and reports the counters next to the closed forms. `turbo_mrc` is run
/// with a pass-through decoder; its passes equal its turbo iterations.
/// `ofdm_mmse` has no entry.
pub fn complexity_report(spec: &SimSpec) -> Result<Vec<ComplexityRecord>> {
    spec.validate()?;
    let cfg = spec.frame_config()?;
    let q = spec.alphabet()?;
    let seed = frame_seed(spec.seed, 0, 0);
    let channel = match &spec.channel {
        super::ChannelSpec::Eva => generate_eva_with_rng(
            &cfg,
            &spec.eva_params(),
            &mut ChaCha8Rng::seed_from_u64(seed),
        )?,
        super::ChannelSpec::Identity => ChannelModel::identity(),
        super::ChannelSpec::File { path } => ChannelModel::from_json_file(path)
            .map_err(|e| Error::ChannelFile(format!("{}: {e}", path.display())))?,
    };
    let table = DopplerSpreadTable::build(&channel, &cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let bits: Vec<u8> = (0..cfg.payload_len() * q.bits_per_symbol())
        .map(|_| rng.random_range(0..2))
        .collect();
    let x = map_to_grid(&qam_modulate(&bits, &q)?, &cfg)?;
    let y = apply_channel_with_rng(&x, &table, 0.0, &mut rng)?;

    let mut out = Vec::new();
    for d in &spec.detectors {
        let (init, passes) = match d.kind {
            DetectorKind::OfdmMmse => continue,
            DetectorKind::Mrc => (InitMode::Zero, d.resolved(spec).unwrap_or(0)),
            DetectorKind::MrcInit => (InitMode::TfMmse, d.resolved(spec).unwrap_or(0)),
            DetectorKind::MmseTfOnly => (InitMode::TfMmse, 0),
            DetectorKind::CodedMrc | DetectorKind::TurboMrc => {
                (spec.coded_init, d.resolved(spec).unwrap_or(0))
            }
        };
        let det_cfg = DetectorConfig {
            iterations: passes,
            init,
            epsilon: spec.epsilon,
            count_ops: true,
            noise_std: 0.0,
        };
        let counts = if d.kind == DetectorKind::TurboMrc {
            let len = cfg.payload_len() * q.bits_per_symbol();
            let tc = TurboConfig {
                n_turbo: passes,
                detector: det_cfg,
                refresh: spec.refresh(),
            };
            turbo_detect(
                &y,
                &table,
                &q,
                &IdentityDecoder { len },
                &Interleaver::identity(len),
                &tc,
                None,
            )?
            .counts
        } else {
            detect(&y, &table, &q, &det_cfg, None)?.counts
        };
        let measured = ComplexityTerms {
            iterative: counts.iterative,
            setup_products: counts.setup_products,
            setup_transforms: counts.setup_transforms,
            tf_init: counts.tf_init,
        };
        out.push(ComplexityRecord {
            detector: d.label(spec),
            doppler_bins: cfg.doppler_bins(),
            delay_bins: cfg.delay_bins(),
            l_max: cfg.l_max(),
            num_delays: table.num_delays(),
            passes,
            formula: ComplexityTerms::new(
                cfg.doppler_bins(),
                cfg.delay_bins(),
                cfg.l_max(),
                table.num_delays(),
                passes,
                init == InitMode::TfMmse,
            ),
            measured,
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidSpec(
            "no detector with a complexity formula in the list".into(),
        ));
    }
    Ok(out)
}

pub fn write_complexity_csv<W: std::io::Write>(records: &[ComplexityRecord], out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "detector",
        "doppler_bins",
        "delay_bins",
        "l_max",
        "num_delays",
        "passes",
        "iterative",
        "setup_products",
        "setup_transforms",
        "tf_init",
        "total",
        "measured_iterative",
        "measured_setup_products",
        "measured_setup_transforms",
        "measured_tf_init",
        "measured_total",
    ])?;
    for r in records {
        let mut row = vec![
            r.detector.clone(),
            r.doppler_bins.to_string(),
            r.delay_bins.to_string(),
            r.l_max.to_string(),
            r.num_delays.to_string(),
            r.passes.to_string(),
        ];
        for t in [&r.formula, &r.measured] {
            row.extend(
                [
                    t.iterative,
                    t.setup_products,
                    t.setup_transforms,
                    t.tf_init,
                    t.total(),
                ]
                .iter()
                .map(u64::to_string),
            );
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_scale_terms() {
        let t = ComplexityTerms::new(128, 512, 32, 9, 10, true);
        assert_eq!(t.iterative, 17_203_200);
        assert_eq!(t.setup_products, 4_976_640);
        assert_eq!(t.setup_transforms, 8_171_520);
        assert_eq!(t.tf_init, 65536 * 51);
        assert_eq!(ComplexityTerms::new(128, 512, 32, 9, 10, false).tf_init, 0);
    }
}
