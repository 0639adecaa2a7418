use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{ChannelSpec, DetectorKind, SimSpec};
use crate::channel::{
    apply_channel_with_rng, generate_eva_with_rng, ChannelModel, DopplerSpreadTable,
};
use crate::coding::{
    coded_mrc, encode_frame, turbo_detect, Interleaver, LdpcCode, SoftDecoder, TurboConfig,
};
use crate::detector::{detect, DetectorConfig, InitMode, OpCounts};
use crate::frame::{map_to_grid, qam_demodulate, qam_modulate, FrameConfig, QamAlphabet};
use crate::tf::ofdm_mmse_baseline_with_rng;
use crate::{Error, Result};

const STREAM_CHANNEL: u64 = 0;
const STREAM_BITS: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_CODED_BITS: u64 = 3;
const STREAM_OFDM_BITS: u64 = 4;
const STREAM_OFDM_NOISE: u64 = 5;

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one frame: `splitmix64(splitmix64(splitmix64(master) ^ snr) ^ frame)`.
pub fn frame_seed(master: u64, snr_index: u64, frame_index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ snr_index) ^ frame_index)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// How frames are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon workers; `None` uses the global pool. Without the `parallel`
    /// feature this runs sequentially.
    Parallel {
        threads: Option<usize>,
    },
}

impl Execution {
    pub fn from_spec(spec: &SimSpec) -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel {
                threads: spec.threads,
            }
        } else {
            Execution::Sequential
        }
    }
}

/// One `(SNR, detector)` point. For coded detectors `frames` and
/// `frame_errors` count LDPC codewords and `bits` counts information bits.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub snr_db: f64,
    pub detector: String,
    pub bits: u64,
    pub bit_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub otfs_frames: u64,
    /// Detector-pass multiplications per OTFS frame.
    pub iterative_mults: u64,
    /// All counted multiplications per OTFS frame.
    pub total_mults: u64,
    /// Summed worker seconds, only with `timing` enabled.
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    bits: u64,
    bit_errors: u64,
    frames: u64,
    frame_errors: u64,
    otfs_frames: u64,
    iterative: u64,
    total: u64,
    nanos: u128,
}

impl Tally {
    fn add(&mut self, o: &Tally) {
        self.bits += o.bits;
        self.bit_errors += o.bit_errors;
        self.frames += o.frames;
        self.frame_errors += o.frame_errors;
        self.otfs_frames += o.otfs_frames;
        self.iterative += o.iterative;
        self.total += o.total;
        self.nanos += o.nanos;
    }

    fn with_counts(mut self, c: &OpCounts) -> Self {
        self.iterative = c.iterative;
        self.total = c.iterative
            + c.setup_products
            + c.setup_transforms
            + c.tf_init
            + c.pass_transforms
            + c.combiner_squares
            + c.feedback;
        self
    }
}

fn count_errors(tx: &[u8], rx: &[u8]) -> u64 {
    tx.iter().zip(rx).filter(|(a, b)| a != b).count() as u64
}

fn uncoded_tally(tx: &[u8], rx: &[u8]) -> Tally {
    let e = count_errors(tx, rx);
    Tally {
        bits: tx.len() as u64,
        bit_errors: e,
        frames: 1,
        frame_errors: u64::from(e > 0),
        otfs_frames: 1,
        ..Tally::default()
    }
}

fn coded_tally(tx: &[u8], rx: &[u8], k: usize) -> Tally {
    let mut t = Tally {
        otfs_frames: 1,
        ..Tally::default()
    };
    for (a, b) in tx.chunks(k).zip(rx.chunks(k)) {
        let e = count_errors(a, b);
        t.bits += a.len() as u64;
        t.bit_errors += e;
        t.frames += 1;
        t.frame_errors += u64::from(e > 0);
    }
    t
}

struct Context {
    cfg: FrameConfig,
    alphabet: QamAlphabet,
    fixed_channel: Option<ChannelModel>,
    code: Option<LdpcCode>,
    interleaver: Option<Interleaver>,
}

impl Context {
    fn new(spec: &SimSpec) -> Result<Self> {
        let cfg = spec.frame_config()?;
        let alphabet = spec.alphabet()?;
        let fixed_channel = match &spec.channel {
            ChannelSpec::Eva => None,
            ChannelSpec::Identity => Some(ChannelModel::identity()),
            ChannelSpec::File { path } => {
                let ch = ChannelModel::from_json_file(path)?;
                ch.validate(&cfg)
                    .map_err(|e| Error::ChannelFile(format!("{}: {e}", path.display())))?;
                Some(ch)
            }
        };
        let (code, interleaver) = if spec.detectors.iter().any(|d| d.kind.is_coded()) {
            let code = match &spec.code_file {
                Some(p) => LdpcCode::from_alist_file(p)?,
                None => LdpcCode::builtin(spec.code_len)?,
            };
            let capacity = cfg.payload_len() * alphabet.bits_per_symbol();
            if capacity % code.n() != 0 {
                return Err(Error::CapacityMismatch {
                    capacity,
                    code_len: code.n(),
                });
            }
            let il = Interleaver::new(capacity, splitmix64(spec.seed ^ 0x1A7E_21EA_7E00_0000));
            (Some(code), Some(il))
        } else {
            (None, None)
        };
        Ok(Context {
            cfg,
            alphabet,
            fixed_channel,
            code,
            interleaver,
        })
    }

    fn channel(&self, spec: &SimSpec, seed: u64) -> Result<ChannelModel> {
        match &self.fixed_channel {
            Some(ch) => Ok(ch.clone()),
            None => generate_eva_with_rng(
                &self.cfg,
                &spec.eva_params(),
                &mut stream(seed, STREAM_CHANNEL),
            ),
        }
    }
}

fn random_bits(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..2u8)).collect()
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, u128)> {
    if timing {
        let t0 = Instant::now();
        let v = f()?;
        Ok((v, t0.elapsed().as_nanos()))
    } else {
        Ok((f()?, 0))
    }
}

/// Runs every listed detector on one frame. All detectors see the same
/// channel realisation and noise draws.
fn simulate_frame(
    spec: &SimSpec,
    ctx: &Context,
    sigma: f64,
    seed: u64,
    active: &[usize],
) -> Result<Vec<Tally>> {
    let cfg = &ctx.cfg;
    let q = &ctx.alphabet;
    let channel = ctx.channel(spec, seed)?;
    let table = DopplerSpreadTable::build(&channel, cfg)?;
    let det_cfg = |iterations: usize, init: InitMode| DetectorConfig {
        iterations,
        init,
        epsilon: spec.epsilon,
        count_ops: true,
        noise_std: sigma,
    };
    let kinds: Vec<_> = active.iter().map(|&i| spec.detectors[i]).collect();

    let uncoded = if kinds.iter().any(|d| {
        matches!(
            d.kind,
            DetectorKind::Mrc | DetectorKind::MrcInit | DetectorKind::MmseTfOnly
        )
    }) {
        let bits = random_bits(
            &mut stream(seed, STREAM_BITS),
            cfg.payload_len() * q.bits_per_symbol(),
        );
        let x = map_to_grid(&qam_modulate(&bits, q)?, cfg)?;
        let y = apply_channel_with_rng(&x, &table, sigma, &mut stream(seed, STREAM_NOISE))?;
        Some((bits, y))
    } else {
        None
    };
    let coded = match (&ctx.code, &ctx.interleaver) {
        (Some(code), Some(il)) if kinds.iter().any(|d| d.kind.is_coded()) => {
            let count = cfg.payload_len() * q.bits_per_symbol() / code.n();
            let info = random_bits(&mut stream(seed, STREAM_CODED_BITS), count * code.k());
            let frame = encode_frame(&info, code, il, q, cfg)?;
            let y = apply_channel_with_rng(
                &frame.grid,
                &table,
                sigma,
                &mut stream(seed, STREAM_NOISE),
            )?;
            Some((info, y))
        }
        _ => None,
    };

    let mut out = Vec::with_capacity(kinds.len());
    for d in kinds {
        let iters = d.resolved(spec).unwrap_or(0);
        let (tally, nanos) = timed(spec.timing, || match d.kind {
            DetectorKind::Mrc | DetectorKind::MrcInit | DetectorKind::MmseTfOnly => {
                let (bits, y) = uncoded.as_ref().expect("uncoded frame drawn");
                let c = match d.kind {
                    DetectorKind::Mrc => det_cfg(iters, InitMode::Zero),
                    DetectorKind::MrcInit => det_cfg(iters, InitMode::TfMmse),
                    _ => det_cfg(0, InitMode::TfMmse),
                };
                let det = detect(y, &table, q, &c, None)?;
                Ok(uncoded_tally(bits, &qam_demodulate(&det.symbols, q)).with_counts(&det.counts))
            }
            DetectorKind::OfdmMmse => {
                let bits = random_bits(
                    &mut stream(seed, STREAM_OFDM_BITS),
                    cfg.delay_bins() * cfg.doppler_bins() * q.bits_per_symbol(),
                );
                let rx = ofdm_mmse_baseline_with_rng(
                    &bits,
                    &channel,
                    cfg,
                    q,
                    sigma,
                    &mut stream(seed, STREAM_OFDM_NOISE),
                )?;
                Ok(uncoded_tally(&bits, &rx))
            }
            DetectorKind::CodedMrc | DetectorKind::TurboMrc => {
                let (info, y) = coded.as_ref().expect("coded frame drawn");
                let code = ctx.code.as_ref().expect("code loaded");
                let il = ctx.interleaver.as_ref().expect("interleaver built");
                let res = if d.kind == DetectorKind::CodedMrc {
                    coded_mrc(
                        y,
                        &table,
                        q,
                        code,
                        il,
                        &det_cfg(iters, spec.coded_init),
                        None,
                    )?
                } else {
                    let tc = TurboConfig {
                        n_turbo: iters,
                        detector: det_cfg(0, spec.coded_init),
                        refresh: spec.refresh(),
                    };
                    turbo_detect(y, &table, q, code, il, &tc, None)?
                };
                Ok(
                    coded_tally(info, &res.info_bits, SoftDecoder::k(code))
                        .with_counts(&res.counts),
                )
            }
        })?;
        out.push(Tally { nanos, ..tally });
    }
    Ok(out)
}

fn finished(spec: &SimSpec, t: &Tally) -> bool {
    let s = &spec.stop;
    if let Some(f) = s.frames {
        return t.otfs_frames >= f;
    }
    let errors_met = t.frame_errors >= s.min_frame_errors && t.bit_errors >= s.min_bit_errors;
    errors_met || t.bits >= s.max_bits || s.max_frames.is_some_and(|m| t.otfs_frames >= m)
}

fn frame_cap(spec: &SimSpec) -> Option<u64> {
    spec.stop.frames.or(spec.stop.max_frames)
}

enum Runner {
    Sequential,
    #[cfg(feature = "parallel")]
    Global,
    #[cfg(feature = "parallel")]
    Pool(rayon::ThreadPool),
}

impl Runner {
    fn new(exec: Execution) -> Result<Self> {
        match exec {
            Execution::Sequential => Ok(Runner::Sequential),
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads: None } => Ok(Runner::Global),
            #[cfg(feature = "parallel")]
            Execution::Parallel { threads: Some(t) } => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map(Runner::Pool)
                .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}"))),
            #[cfg(not(feature = "parallel"))]
            Execution::Parallel { .. } => Ok(Runner::Sequential),
        }
    }

    fn map<T: Send>(
        &self,
        frames: std::ops::Range<u64>,
        job: impl Fn(u64) -> Result<T> + Sync + Send,
    ) -> Result<Vec<T>> {
        #[cfg(feature = "parallel")]
        use rayon::prelude::*;
        match self {
            Runner::Sequential => frames.map(job).collect(),
            #[cfg(feature = "parallel")]
            Runner::Global => frames.into_par_iter().map(job).collect(),
            #[cfg(feature = "parallel")]
            Runner::Pool(pool) => pool.install(|| frames.into_par_iter().map(job).collect()),
        }
    }
}

/// Runs the campaign with the scheduling implied by the spec.
pub fn run_campaign(spec: &SimSpec) -> Result<Vec<MetricRecord>> {
    run_campaign_with(spec, Execution::from_spec(spec))
}

/// Frames are drawn in fixed-size batches and stop rules are checked at
/// batch boundaries, so results are identical for every `exec`.
pub fn run_campaign_with(spec: &SimSpec, exec: Execution) -> Result<Vec<MetricRecord>> {
    spec.validate()?;
    let ctx = Context::new(spec)?;
    let runner = Runner::new(exec)?;
    let mut records = Vec::with_capacity(spec.snr_db.len() * spec.detectors.len());
    for (si, &snr) in spec.snr_db.iter().enumerate() {
        let sigma = SimSpec::noise_std(snr);
        let mut tallies = vec![Tally::default(); spec.detectors.len()];
        let mut active: Vec<usize> = (0..spec.detectors.len()).collect();
        let mut next = 0u64;
        while !active.is_empty() {
            let mut end = next + spec.batch as u64;
            if let Some(cap) = frame_cap(spec) {
                end = end.min(cap);
            }
            let batch = runner.map(next..end, |f| {
                simulate_frame(
                    spec,
                    &ctx,
                    sigma,
                    frame_seed(spec.seed, si as u64, f),
                    &active,
                )
            })?;
            for frame in &batch {
                for (&d, t) in active.iter().zip(frame) {
                    tallies[d].add(t);
                }
            }
            next = end;
            active.retain(|&d| !finished(spec, &tallies[d]));
        }
        for (d, t) in spec.detectors.iter().zip(&tallies) {
            let per_frame = |v: u64| v.checked_div(t.otfs_frames).unwrap_or(0);
            records.push(MetricRecord {
                snr_db: snr,
                detector: d.label(spec),
                bits: t.bits,
                bit_errors: t.bit_errors,
                frames: t.frames,
                frame_errors: t.frame_errors,
                ber: if t.bits > 0 {
                    t.bit_errors as f64 / t.bits as f64
                } else {
                    0.0
                },
                fer: if t.frames > 0 {
                    t.frame_errors as f64 / t.frames as f64
                } else {
                    0.0
                },
                otfs_frames: t.otfs_frames,
                iterative_mults: per_frame(t.iterative),
                total_mults: per_frame(t.total),
                wall_time_s: spec.timing.then_some(t.nanos as f64 * 1e-9),
            });
        }
    }
    Ok(records)
}
