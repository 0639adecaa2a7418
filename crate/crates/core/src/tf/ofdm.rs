use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{add_awgn, apply_channel_time, ChannelModel};
use crate::fourier::FftPair;
use crate::frame::{qam_demodulate, qam_modulate, FrameConfig, QamAlphabet};
use crate::{Error, Result, C64};

/// CP-OFDM over the same time-varying channel with a per-subcarrier MMSE
/// equaliser and hard demapping.
///
/// `N` OFDM symbols of `M` subcarriers (so `bits.len() = M N log2|Q|`), a
/// cyclic prefix of `l_max` samples, the Doppler phase advancing per sample.
/// Each symbol is equalised with the channel frozen at its mid-point; the
/// resulting inter-carrier interference is left in place.
pub fn ofdm_mmse_baseline(
    bits: &[u8],
    model: &ChannelModel,
    cfg: &FrameConfig,
    alphabet: &QamAlphabet,
    sigma_w: f64,
    seed: u64,
) -> Result<Vec<u8>> {
    ofdm_mmse_baseline_with_rng(
        bits,
        model,
        cfg,
        alphabet,
        sigma_w,
        &mut ChaCha8Rng::seed_from_u64(seed),
    )
}

pub fn ofdm_mmse_baseline_with_rng<R: Rng + ?Sized>(
    bits: &[u8],
    model: &ChannelModel,
    cfg: &FrameConfig,
    alphabet: &QamAlphabet,
    sigma_w: f64,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let (m, n, cp) = (cfg.delay_bins(), cfg.doppler_bins(), cfg.l_max());
    let expected = m * n * alphabet.bits_per_symbol();
    if bits.len() != expected {
        return Err(Error::DimensionMismatch {
            expected: format!("{expected} bits"),
            got: bits.len().to_string(),
        });
    }
    if model.max_delay() > cp {
        return Err(Error::DelayOutOfRange {
            delay: model.max_delay(),
            l_max: cp,
        });
    }
    let symbols = qam_modulate(bits, alphabet)?;
    let plan = FftPair::new(m);
    let mut scratch = plan.scratch();
    let sym_len = m + cp;

    let mut tx = Vec::with_capacity(n * sym_len);
    let mut buf = vec![C64::default(); m];
    for block in symbols.chunks_exact(m) {
        buf.copy_from_slice(block);
        plan.inverse_unitary(&mut buf, &mut scratch);
        tx.extend_from_slice(&buf[m - cp..]);
        tx.extend_from_slice(&buf);
    }
    let mut rx = apply_channel_time(&tx, model, cfg);
    add_awgn(&mut rx, sigma_w, rng);

    let noise = sigma_w * sigma_w;
    let mut detected = Vec::with_capacity(symbols.len());
    for t in 0..n {
        let start = t * sym_len + cp;
        buf.copy_from_slice(&rx[start..start + m]);
        plan.forward_unitary(&mut buf, &mut scratch);
        let mid = (start + m / 2) as i64;
        for (f, y) in buf.iter().enumerate() {
            let h: C64 = model
                .paths()
                .iter()
                .map(|p| {
                    let delay_phase = C64::from_polar(
                        1.0,
                        -2.0 * std::f64::consts::PI * ((f * p.delay) % m) as f64 / m as f64,
                    );
                    p.gain * delay_phase * cfg.z_pow(p.doppler * mid)
                })
                .sum();
            let den = h.norm_sqr() + noise;
            detected.push(if den > 0.0 {
                h.conj() * y / den
            } else {
                C64::default()
            });
        }
    }
    Ok(qam_demodulate(&detected, alphabet))
}
