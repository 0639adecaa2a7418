//! Slow, literal reference implementations for tests. Everything here is
//! dense and quadratic (or worse); sizes are capped.

use crate::channel::{ChannelModel, DopplerSpreadTable};
use crate::frame::{DelayDopplerGrid, FrameConfig, QamAlphabet};
use crate::{Error, Result, C64};

/// Largest side of a [`FullChannelMatrix`].
pub const FULL_SIZE_CAP: usize = 4096;
/// Largest `N` or `M` accepted by [`dense_mrc_reference`].
pub const DENSE_MRC_CAP: usize = 16;

/// The vectorised `NM x NM` channel: block `(m, m - l)` is the circulant
/// `K_{m,l}` and every other block is zero.
#[derive(Debug, Clone)]
pub struct FullChannelMatrix {
    size: usize,
    block: usize,
    data: Vec<C64>,
}

impl FullChannelMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn block_len(&self) -> usize {
        self.block
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.size + j]
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.size);
        self.data
            .chunks_exact(self.size)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Block `(bi, bj)` as a row-major `N x N` copy.
    pub fn block(&self, bi: usize, bj: usize) -> Vec<C64> {
        let n = self.block;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            let start = (bi * n + i) * self.size + bj * n;
            out.extend_from_slice(&self.data[start..start + n]);
        }
        out
    }
}

fn circulant(first_col: &[C64]) -> Vec<C64> {
    let n = first_col.len();
    let mut out = vec![C64::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = first_col[(i + n - j) % n];
        }
    }
    out
}

pub fn build_full_h(table: &DopplerSpreadTable) -> Result<FullChannelMatrix> {
    let cfg = table.config();
    let (m_len, n) = (cfg.delay_bins(), cfg.doppler_bins());
    let size = m_len * n;
    if size > FULL_SIZE_CAP {
        return Err(Error::SizeCap {
            cap: FULL_SIZE_CAP,
            got: size,
        });
    }
    let mut data = vec![C64::default(); size * size];
    for m in 0..m_len {
        for (li, &l) in table.delays().iter().enumerate() {
            if m < l {
                continue;
            }
            let k = circulant(&table.spread_vector(m, li));
            let col0 = (m - l) * n;
            for i in 0..n {
                for j in 0..n {
                    data[(m * n + i) * size + col0 + j] = k[i * n + j];
                }
            }
        }
    }
    Ok(FullChannelMatrix {
        size,
        block: n,
        data,
    })
}

/// Rectangular-pulse input-output relation evaluated term by term, with
/// the extra `exp(-j 2 pi n / N)` phase on wrapped delays. No null-row
/// assumption is made on `x`.
pub fn apply_exact_io(
    x: &DelayDopplerGrid,
    model: &ChannelModel,
    cfg: &FrameConfig,
) -> DelayDopplerGrid {
    let (m_len, n_len) = (cfg.delay_bins(), cfg.doppler_bins());
    let mut y = vec![C64::default(); m_len * n_len];
    for m in 0..m_len {
        for n in 0..n_len {
            let mut acc = C64::default();
            for p in model.paths() {
                let src_m = (m + m_len - p.delay % m_len) % m_len;
                let src_n = (n as i64 - p.doppler).rem_euclid(n_len as i64) as usize;
                let mut alpha = cfg.z_pow(p.doppler * src_m as i64);
                if m < p.delay {
                    alpha *=
                        C64::from_polar(1.0, -2.0 * std::f64::consts::PI * n as f64 / n_len as f64);
                }
                acc += p.gain * alpha * x.get(src_m, src_n);
            }
            y[m * n_len + n] = acc;
        }
    }
    DelayDopplerGrid::received(cfg, y).expect("dimensions match")
}

/// Ideal-pulse relation: 2-D circular convolution of `x` with `H_dd`.
pub fn apply_ideal_io(
    x: &DelayDopplerGrid,
    model: &ChannelModel,
    cfg: &FrameConfig,
) -> DelayDopplerGrid {
    let (m_len, n_len) = (cfg.delay_bins(), cfg.doppler_bins());
    let mut y = vec![C64::default(); m_len * n_len];
    for m in 0..m_len {
        for n in 0..n_len {
            let mut acc = C64::default();
            for p in model.paths() {
                let src_m = (m + m_len - p.delay % m_len) % m_len;
                let src_n = (n as i64 - p.doppler).rem_euclid(n_len as i64) as usize;
                acc += p.gain * x.get(src_m, src_n);
            }
            y[m * n_len + n] = acc;
        }
    }
    DelayDopplerGrid::received(cfg, y).expect("dimensions match")
}

/// Output of [`dense_mrc_reference`].
#[derive(Debug, Clone)]
pub struct DenseMrcOutput {
    pub estimates: Vec<C64>,
    pub combined: Vec<C64>,
}

fn matvec(a: &[C64], x: &[C64]) -> Vec<C64> {
    a.chunks_exact(x.len())
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

fn adjoint_matvec(a: &[C64], x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].conj() * x[i]).sum())
        .collect()
}

// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<C64>, mut b: Vec<C64>) -> Option<Vec<C64>> {
    let n = b.len();
    for col in 0..n {
        let piv =
            (col..n).max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))?;
        if a[piv * n + col].norm() == 0.0 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        let d = a[col * n + col];
        for i in col + 1..n {
            let f = a[i * n + col] / d;
            if f == C64::default() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[i * n + k] -= f * v;
            }
            let v = b[col];
            b[i] -= f * v;
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Some(b)
}

/// Row-by-row MRC with decision feedback, recomputing every
/// interference-cancelled branch signal from the current estimates and
/// solving the combiner with dense matrices.
pub fn dense_mrc_reference(
    received: &DelayDopplerGrid,
    table: &DopplerSpreadTable,
    alphabet: &QamAlphabet,
    passes: usize,
    epsilon: f64,
    initial: Option<&[C64]>,
) -> Result<DenseMrcOutput> {
    let cfg = table.config();
    let (m_len, n, mp) = (cfg.delay_bins(), cfg.doppler_bins(), cfg.payload_rows());
    if m_len > DENSE_MRC_CAP || n > DENSE_MRC_CAP {
        return Err(Error::SizeCap {
            cap: DENSE_MRC_CAP,
            got: m_len.max(n),
        });
    }
    let delays = table.delays();
    // K[r][li] for every received row r.
    let k: Vec<Vec<Vec<C64>>> = (0..m_len)
        .map(|r| {
            (0..delays.len())
                .map(|li| circulant(&table.spread_vector(r, li)))
                .collect()
        })
        .collect();

    let mut est = match initial {
        Some(x0) => x0.to_vec(),
        None => vec![C64::default(); mp * n],
    };
    let mut combined = est.clone();
    let row_of = |est: &[C64], r: usize| -> Vec<C64> {
        if r < mp {
            est[r * n..(r + 1) * n].to_vec()
        } else {
            vec![C64::default(); n]
        }
    };

    for _ in 0..passes {
        for m in 0..mp {
            let mut g = vec![C64::default(); n];
            let mut d = vec![C64::default(); n * n];
            for (li, &l) in delays.iter().enumerate() {
                let r = m + l;
                let mut b = received.row(r).to_vec();
                for (lj, &lp) in delays.iter().enumerate() {
                    if lj == li || r < lp {
                        continue;
                    }
                    let t = matvec(&k[r][lj], &row_of(&est, r - lp));
                    b.iter_mut().zip(t).for_each(|(bv, tv)| *bv -= tv);
                }
                let kk = &k[r][li];
                adjoint_matvec(kk, &b)
                    .into_iter()
                    .zip(g.iter_mut())
                    .for_each(|(v, gv)| *gv += v);
                for i in 0..n {
                    for j in 0..n {
                        let mut s = C64::default();
                        for q in 0..n {
                            s += kk[q * n + i].conj() * kk[q * n + j];
                        }
                        d[i * n + j] += s;
                    }
                }
            }
            for i in 0..n {
                d[i * n + i] += epsilon;
            }
            let c = solve(d, g).ok_or(Error::SingularCombiner { row: m, bin: 0 })?;
            for (j, cv) in c.iter().enumerate() {
                combined[m * n + j] = *cv;
                est[m * n + j] = alphabet.nearest(*cv);
            }
        }
    }
    Ok(DenseMrcOutput {
        estimates: est,
        combined,
    })
}
