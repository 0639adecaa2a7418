use crate::frame::QamAlphabet;
use crate::C64;

/// Magnitude bound applied to every LLR.
pub const LLR_MAX: f64 = 50.0;

/// Max-log bit LLRs from combiner outputs.
///
/// Row `m` uses the effective noise variance
/// `sigma_w^2 * mean_k(1 / R_m(k))`, the diagonal of `sigma_w^2 R_m^{-1}`.
/// Positive values favour bit 0. Both slices are row-major with rows of
/// `row_len` entries; output order follows the symbols, most significant
/// label bit first.
pub fn soft_llrs(
    combined: &[C64],
    r_spectra: &[f64],
    row_len: usize,
    sigma_w: f64,
    alphabet: &QamAlphabet,
) -> Vec<f64> {
    assert_eq!(
        combined.len(),
        r_spectra.len(),
        "one spectrum bin per combiner output"
    );
    assert!(row_len > 0 && combined.len().is_multiple_of(row_len));
    let mut out = Vec::with_capacity(combined.len() * alphabet.bits_per_symbol());
    for (c_row, r_row) in combined.chunks(row_len).zip(r_spectra.chunks(row_len)) {
        let inv_mean = r_row.iter().map(|&r| 1.0 / r).sum::<f64>() / r_row.len() as f64;
        let var = sigma_w * sigma_w * inv_mean;
        for &c in c_row {
            symbol_llrs(c, var, alphabet, &mut out);
        }
    }
    out
}

/// Max-log LLRs for one observation with effective noise variance `var`.
pub fn symbol_llrs(c: C64, var: f64, alphabet: &QamAlphabet, out: &mut Vec<f64>) {
    let bps = alphabet.bits_per_symbol();
    let dists: Vec<f64> = alphabet
        .points()
        .iter()
        .map(|p| (p - c).norm_sqr())
        .collect();
    for b in 0..bps {
        let (mut d0, mut d1) = (f64::INFINITY, f64::INFINITY);
        for (idx, &d) in dists.iter().enumerate() {
            if alphabet.label_bit(idx, b) == 0 {
                d0 = d0.min(d);
            } else {
                d1 = d1.min(d);
            }
        }
        let diff = d1 - d0;
        let llr = if var > 0.0 && var.is_finite() {
            diff / var
        } else if diff == 0.0 {
            0.0
        } else {
            diff.signum() * LLR_MAX
        };
        out.push(llr.clamp(-LLR_MAX, LLR_MAX));
    }
}
