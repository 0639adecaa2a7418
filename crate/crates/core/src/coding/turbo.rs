use super::{DecodeOutput, Interleaver, LdpcCode, MAX_DECODER_ITERS};
use crate::channel::DopplerSpreadTable;
use crate::detector::{
    detect, initial_estimate, soft_llrs, DetectorConfig, DetectorState, OpCounts, Refresh,
};
use crate::frame::{map_to_grid, qam_modulate, DelayDopplerGrid, FrameConfig, QamAlphabet};
use crate::{Error, Result, C64};

/// Soft-in soft-out channel decoder used by the turbo loop.
pub trait SoftDecoder: Sync {
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn encode(&self, info: &[u8]) -> Result<Vec<u8>>;
    fn decode(&self, llrs: &[f64]) -> Result<DecodeOutput>;
    fn extract_info(&self, codeword: &[u8]) -> Vec<u8>;
}

impl SoftDecoder for LdpcCode {
    fn n(&self) -> usize {
        LdpcCode::n(self)
    }

    fn k(&self) -> usize {
        LdpcCode::k(self)
    }

    fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        LdpcCode::encode(self, info)
    }

    fn decode(&self, llrs: &[f64]) -> Result<DecodeOutput> {
        LdpcCode::decode(self, llrs, MAX_DECODER_ITERS)
    }

    fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        LdpcCode::extract_info(self, codeword)
    }
}

/// Uncoded pass-through: the posterior is the input.
#[derive(Debug, Clone, Copy)]
pub struct IdentityDecoder {
    pub len: usize,
}

impl SoftDecoder for IdentityDecoder {
    fn n(&self) -> usize {
        self.len
    }

    fn k(&self) -> usize {
        self.len
    }

    fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        Ok(info.to_vec())
    }

    fn decode(&self, llrs: &[f64]) -> Result<DecodeOutput> {
        Ok(DecodeOutput {
            llrs: llrs.to_vec(),
            bits: hard_bits(llrs),
            converged: true,
            iterations: 0,
        })
    }

    fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        codeword.to_vec()
    }
}

fn hard_bits(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}

fn codewords_per_frame<D: SoftDecoder + ?Sized>(
    code: &D,
    interleaver: &Interleaver,
    alphabet: &QamAlphabet,
    cfg: &FrameConfig,
) -> Result<usize> {
    let capacity = cfg.payload_len() * alphabet.bits_per_symbol();
    if !capacity.is_multiple_of(code.n()) {
        return Err(Error::CapacityMismatch {
            capacity,
            code_len: code.n(),
        });
    }
    if interleaver.len() != capacity {
        return Err(Error::DimensionMismatch {
            expected: format!("interleaver over {capacity} bits"),
            got: interleaver.len().to_string(),
        });
    }
    Ok(capacity / code.n())
}

/// Transmit side of a coded frame.
#[derive(Debug, Clone)]
pub struct CodedFrame {
    /// Concatenated codewords before interleaving.
    pub codewords: Vec<u8>,
    pub grid: DelayDopplerGrid,
}

/// Encodes `info` (a whole number of codewords' worth) into consecutive
/// codewords, interleaves across the frame and maps to the payload rows.
pub fn encode_frame<D: SoftDecoder + ?Sized>(
    info: &[u8],
    code: &D,
    interleaver: &Interleaver,
    alphabet: &QamAlphabet,
    cfg: &FrameConfig,
) -> Result<CodedFrame> {
    let count = codewords_per_frame(code, interleaver, alphabet, cfg)?;
    if info.len() != count * code.k() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} info bits", count * code.k()),
            got: info.len().to_string(),
        });
    }
    let mut codewords = Vec::with_capacity(count * code.n());
    for chunk in info.chunks_exact(code.k()) {
        codewords.extend(code.encode(chunk)?);
    }
    let symbols = qam_modulate(&interleaver.interleave(&codewords), alphabet)?;
    Ok(CodedFrame {
        grid: map_to_grid(&symbols, cfg)?,
        codewords,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurboConfig {
    /// Turbo iterations; each runs one detector pass and one decode.
    pub n_turbo: usize,
    /// Initialisation, regulariser and noise level; `iterations` is unused.
    pub detector: DetectorConfig,
    pub refresh: Refresh,
}

#[derive(Debug, Clone)]
pub struct TurboOutput {
    /// Decoded information bits, codeword after codeword.
    pub info_bits: Vec<u8>,
    /// Final hard codeword decisions, concatenated.
    pub codeword_bits: Vec<u8>,
    pub converged: Vec<bool>,
    pub counts: OpCounts,
}

fn decode_frame<D: SoftDecoder + ?Sized>(
    llrs: &[f64],
    code: &D,
    interleaver: &Interleaver,
) -> Result<(Vec<f64>, TurboOutput)> {
    let deint = interleaver.deinterleave(llrs);
    let mut post = Vec::with_capacity(deint.len());
    let mut out = TurboOutput {
        info_bits: Vec::new(),
        codeword_bits: Vec::with_capacity(deint.len()),
        converged: Vec::new(),
        counts: OpCounts::default(),
    };
    for chunk in deint.chunks_exact(code.n()) {
        let d = code.decode(chunk)?;
        out.info_bits.extend(code.extract_info(&d.bits));
        out.codeword_bits.extend_from_slice(&d.bits);
        out.converged.push(d.converged);
        post.extend(d.llrs);
    }
    Ok((post, out))
}

/// Detector without feedback: `S` passes, soft demapping, one decode.
pub fn coded_mrc<D: SoftDecoder + ?Sized>(
    received: &DelayDopplerGrid,
    table: &DopplerSpreadTable,
    alphabet: &QamAlphabet,
    code: &D,
    interleaver: &Interleaver,
    cfg: &DetectorConfig,
    x0: Option<&[C64]>,
) -> Result<TurboOutput> {
    let frame = table.config();
    codewords_per_frame(code, interleaver, alphabet, frame)?;
    let det = detect(received, table, alphabet, cfg, x0)?;
    let llrs = soft_llrs(
        &det.combined,
        &det.r_spectra,
        frame.doppler_bins(),
        cfg.noise_std,
        alphabet,
    );
    let (_, mut out) = decode_frame(&llrs, code, interleaver)?;
    out.counts = det.counts;
    Ok(out)
}

/// Turbo MRC: each iteration runs one detector pass, demaps, deinterleaves,
/// decodes, and feeds hard decisions on the interleaved decoder posteriors
/// back as the detector's estimates.
pub fn turbo_detect<D: SoftDecoder + ?Sized>(
    received: &DelayDopplerGrid,
    table: &DopplerSpreadTable,
    alphabet: &QamAlphabet,
    code: &D,
    interleaver: &Interleaver,
    cfg: &TurboConfig,
    x0: Option<&[C64]>,
) -> Result<TurboOutput> {
    if cfg.n_turbo == 0 {
        return Err(Error::InvalidConfig("n_turbo must be at least 1".into()));
    }
    let frame = table.config();
    codewords_per_frame(code, interleaver, alphabet, frame)?;
    let det = &cfg.detector;
    det.validate()?;
    let (initial, tf_cost) = initial_estimate(received, table, det, x0)?;
    let mut state = DetectorState::new(
        received,
        table,
        det.epsilon,
        det.count_ops,
        initial.as_deref(),
    )?;
    let mut it = 0;
    loop {
        state.iterate(alphabet)?;
        let llrs = soft_llrs(
            state.combined(),
            state.r_spectra(),
            frame.doppler_bins(),
            det.noise_std,
            alphabet,
        );
        let (post, mut out) = decode_frame(&llrs, code, interleaver)?;
        it += 1;
        if it == cfg.n_turbo {
            out.counts = state.counts();
            if det.count_ops {
                out.counts.tf_init = tf_cost;
            }
            return Ok(out);
        }
        let feedback = hard_bits(&interleaver.interleave(&post));
        state.install(&qam_modulate(&feedback, alphabet)?, cfg.refresh)?;
    }
}
