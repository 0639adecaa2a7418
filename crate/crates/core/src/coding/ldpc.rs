use std::path::Path;

use super::ParityCheck;
use crate::{Error, Result};

/// Scale applied to check-node messages.
pub const MIN_SUM_SCALE: f64 = 0.75;
pub const MAX_DECODER_ITERS: usize = 50;

const PEG_1024: &str = include_str!("../../codes/peg_1024_r05.alist");
const PEG_4096: &str = include_str!("../../codes/peg_4096_r05.alist");

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    /// Posterior LLRs, positive favouring 0.
    pub llrs: Vec<f64>,
    /// Hard decisions on `llrs` (a zero LLR decides 0).
    pub bits: Vec<u8>,
    /// Zero syndrome with no undecided (zero) posterior.
    pub converged: bool,
    /// Iterations run, counted from 1.
    pub iterations: usize,
}

/// Binary LDPC code with a systematic encoder derived from `H` by Gaussian
/// elimination over GF(2).
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: ParityCheck,
    info_pos: Vec<usize>,
    parity_pos: Vec<usize>,
    // Reduced rows packed 64 columns per word; row i fixes bit parity_pos[i].
    reduced: Vec<Vec<u64>>,
    // Edge layout in check order plus the per-variable edge lists.
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl LdpcCode {
    pub fn new(h: ParityCheck) -> Result<Self> {
        let (m, n) = (h.rows(), h.cols());
        let w = words(n);
        let mut rows: Vec<Vec<u64>> = (0..m)
            .map(|r| {
                let mut bits = vec![0u64; w];
                for &c in h.row(r) {
                    bits[c / 64] |= 1 << (c % 64);
                }
                bits
            })
            .collect();
        // Reduced row echelon form, pivot columns searched from the right so
        // the parity part sits at the end for a typical code.
        let mut pivots = Vec::with_capacity(m);
        let mut rank = 0;
        for col in (0..n).rev() {
            if rank == m {
                break;
            }
            let (wi, bit) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..m).find(|&r| rows[r][wi] & bit != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[wi] & bit != 0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rank < m {
            return Err(Error::RankDeficient { rank, rows: m });
        }
        rows.truncate(rank);
        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&c| is_pivot[c] = true);
        let info_pos: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();

        let mut check_ptr = vec![0];
        let mut edge_var = Vec::with_capacity(h.edges());
        let mut var_edges = vec![Vec::new(); n];
        for r in 0..m {
            for &c in h.row(r) {
                var_edges[c].push(edge_var.len());
                edge_var.push(c);
            }
            check_ptr.push(edge_var.len());
        }
        Ok(LdpcCode {
            h,
            info_pos,
            parity_pos: pivots,
            reduced: rows,
            check_ptr,
            edge_var,
            var_edges,
        })
    }

    pub fn from_alist(text: &str) -> Result<Self> {
        LdpcCode::new(ParityCheck::from_alist(text)?)
    }

    pub fn from_alist_file(path: impl AsRef<Path>) -> Result<Self> {
        LdpcCode::from_alist(&std::fs::read_to_string(path)?)
    }

    /// One of the shipped rate-1/2 PEG codes (`n = 1024` or `4096`).
    pub fn builtin(n: usize) -> Result<Self> {
        match n {
            1024 => LdpcCode::from_alist(PEG_1024),
            4096 => LdpcCode::from_alist(PEG_4096),
            _ => Err(Error::InvalidConfig(format!(
                "no built-in code of length {n} (available: 1024, 4096)"
            ))),
        }
    }

    pub fn parity_check(&self) -> &ParityCheck {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn k(&self) -> usize {
        self.info_pos.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Codeword positions carrying the information bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_pos
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} info bits", self.k()),
                got: info.len().to_string(),
            });
        }
        let n = self.n();
        let mut packed = vec![0u64; words(n)];
        for (&pos, &b) in self.info_pos.iter().zip(info) {
            if b & 1 == 1 {
                packed[pos / 64] |= 1 << (pos % 64);
            }
        }
        let mut cw = vec![0u8; n];
        for (&pos, &b) in self.info_pos.iter().zip(info) {
            cw[pos] = b & 1;
        }
        for (row, &p) in self.reduced.iter().zip(&self.parity_pos) {
            let ones: u32 = row
                .iter()
                .zip(&packed)
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            cw[p] = (ones & 1) as u8;
        }
        Ok(cw)
    }

    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_pos.iter().map(|&p| codeword[p]).collect()
    }

    /// Normalised min-sum, flooding schedule, stopping early once the hard
    /// decisions satisfy every check.
    pub fn decode(&self, llrs: &[f64], max_iters: usize) -> Result<DecodeOutput> {
        let n = self.n();
        if llrs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} LLRs"),
                got: llrs.len().to_string(),
            });
        }
        let edges = self.edge_var.len();
        let mut v2c: Vec<f64> = self.edge_var.iter().map(|&v| llrs[v]).collect();
        let mut c2v = vec![0.0; edges];
        let mut post = llrs.to_vec();
        let mut bits = vec![0u8; n];
        let mut converged = false;
        let mut iterations = 0;
        while iterations < max_iters {
            iterations += 1;
            for win in self.check_ptr.windows(2) {
                let (lo, hi) = (win[0], win[1]);
                let mut sign = 1.0;
                let (mut min1, mut min2, mut arg) = (f64::INFINITY, f64::INFINITY, lo);
                for (e, &v) in v2c.iter().enumerate().take(hi).skip(lo) {
                    if v < 0.0 {
                        sign = -sign;
                    }
                    let a = v.abs();
                    if a < min1 {
                        min2 = min1;
                        min1 = a;
                        arg = e;
                    } else if a < min2 {
                        min2 = a;
                    }
                }
                for e in lo..hi {
                    let mag = if e == arg { min2 } else { min1 };
                    let s = if v2c[e] < 0.0 { -sign } else { sign };
                    c2v[e] = MIN_SUM_SCALE * s * if mag.is_finite() { mag } else { 0.0 };
                }
            }
            for (v, es) in self.var_edges.iter().enumerate() {
                let total = llrs[v] + es.iter().map(|&e| c2v[e]).sum::<f64>();
                post[v] = total;
                for &e in es {
                    v2c[e] = total - c2v[e];
                }
                bits[v] = u8::from(total < 0.0);
            }
            if self.h.syndrome(&bits).iter().all(|&s| s == 0) && post.iter().all(|&l| l != 0.0) {
                converged = true;
                break;
            }
        }
        Ok(DecodeOutput {
            llrs: post,
            bits,
            converged,
            iterations,
        })
    }
}
