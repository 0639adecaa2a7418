use crate::{Error, Result};

/// Sparse binary parity-check matrix kept as both row and column adjacency
/// lists (0-based, ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheck {
    rows: usize,
    cols: usize,
    row_adj: Vec<Vec<usize>>,
    col_adj: Vec<Vec<usize>>,
}

impl ParityCheck {
    /// Builds from the column index list of each check.
    pub fn from_rows(cols: usize, mut row_adj: Vec<Vec<usize>>) -> Result<Self> {
        let rows = row_adj.len();
        let mut col_adj = vec![Vec::new(); cols];
        for (r, adj) in row_adj.iter_mut().enumerate() {
            adj.sort_unstable();
            if adj.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Alist(format!("row {} lists a column twice", r + 1)));
            }
            for &c in adj.iter() {
                if c >= cols {
                    return Err(Error::Alist(format!(
                        "row {} references column {}",
                        r + 1,
                        c + 1
                    )));
                }
                col_adj[c].push(r);
            }
        }
        Ok(ParityCheck {
            rows,
            cols,
            row_adj,
            col_adj,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_adj[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_adj[c]
    }

    pub fn edges(&self) -> usize {
        self.row_adj.iter().map(Vec::len).sum()
    }

    /// `H c` over GF(2); `c` holds one bit per byte.
    pub fn syndrome(&self, c: &[u8]) -> Vec<u8> {
        self.row_adj
            .iter()
            .map(|adj| adj.iter().fold(0u8, |acc, &j| acc ^ (c[j] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.cols && self.syndrome(c).iter().all(|&s| s == 0)
    }

    /// Parses the alist layout: `n m`, the two maximum weights, the column
    /// and row weight lists, then one 1-based index list per column and per
    /// row, zero padded to the maximum weight.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut tok = text.split_ascii_whitespace().map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Alist(format!("expected an unsigned integer, found {t:?}")))
        });
        let mut next = |what: &str| -> Result<usize> {
            tok.next()
                .unwrap_or_else(|| Err(Error::Alist(format!("file ends before {what}"))))
        };
        let n = next("column count")?;
        let m = next("row count")?;
        if n == 0 || m == 0 {
            return Err(Error::Alist("empty matrix".into()));
        }
        let max_col = next("max column weight")?;
        let max_row = next("max row weight")?;
        let col_w = (0..n)
            .map(|_| next("column weights"))
            .collect::<Result<Vec<_>>>()?;
        let row_w = (0..m)
            .map(|_| next("row weights"))
            .collect::<Result<Vec<_>>>()?;
        if col_w.iter().max() != Some(&max_col) || row_w.iter().max() != Some(&max_row) {
            return Err(Error::Alist(
                "maximum weight does not match weight list".into(),
            ));
        }
        let mut read_lists =
            |count: usize, width: usize, weights: &[usize], bound: usize, what: &str| {
                let mut out = Vec::with_capacity(count);
                for (i, &weight) in weights[..count].iter().enumerate() {
                    let mut adj = Vec::with_capacity(weight);
                    for slot in 0..width {
                        let v = next(what)?;
                        if slot < weight {
                            if v == 0 || v > bound {
                                return Err(Error::Alist(format!(
                                    "{what} {} has index {v} out of range",
                                    i + 1
                                )));
                            }
                            adj.push(v - 1);
                        } else if v != 0 {
                            return Err(Error::Alist(format!(
                                "{what} {} padding must be 0, found {v}",
                                i + 1
                            )));
                        }
                    }
                    out.push(adj);
                }
                Ok(out)
            };
        let cols_lists = read_lists(n, max_col, &col_w, m, "column")?;
        let rows_lists = read_lists(m, max_row, &row_w, n, "row")?;
        if tok.next().is_some() {
            return Err(Error::Alist("trailing data after row lists".into()));
        }
        let h = ParityCheck::from_rows(n, rows_lists)?;
        for (c, mut listed) in cols_lists.into_iter().enumerate() {
            listed.sort_unstable();
            if listed != h.col_adj[c] {
                return Err(Error::Alist(format!(
                    "column {} disagrees with the row lists",
                    c + 1
                )));
            }
        }
        Ok(h)
    }

    pub fn to_alist(&self) -> String {
        let max_col = self.col_adj.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.row_adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut s = format!("{} {}\n{} {}\n", self.cols, self.rows, max_col, max_row);
        let join = |v: &mut dyn Iterator<Item = usize>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        s += &join(&mut self.col_adj.iter().map(Vec::len));
        s.push('\n');
        s += &join(&mut self.row_adj.iter().map(Vec::len));
        s.push('\n');
        for (lists, width) in [(&self.col_adj, max_col), (&self.row_adj, max_row)] {
            for adj in lists.iter() {
                let padded = adj
                    .iter()
                    .map(|&v| v + 1)
                    .chain(std::iter::repeat(0))
                    .take(width);
                s += &join(&mut padded.into_iter());
                s.push('\n');
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Hamming (7,4).
    const HAMMING: &str = "7 3\n3 4\n1 1 1 2 2 2 3\n4 4 4\n1 0 0\n2 0 0\n3 0 0\n1 2 0\n1 3 0\n2 3 0\n1 2 3\n1 4 5 7\n2 4 6 7\n3 5 6 7\n";

    #[test]
    fn parses_and_writes_back_identically() {
        let h = ParityCheck::from_alist(HAMMING).unwrap();
        assert_eq!((h.rows(), h.cols(), h.edges()), (3, 7, 12));
        assert_eq!(h.row(2), &[2, 4, 5, 6]);
        assert_eq!(h.col(6), &[0, 1, 2]);
        assert_eq!(h.to_alist(), HAMMING);
    }

    #[test]
    fn syndrome_of_codeword() {
        let h = ParityCheck::from_alist(HAMMING).unwrap();
        assert!(h.is_codeword(&[1, 1, 1, 0, 0, 0, 1]));
        assert!(!h.is_codeword(&[1, 0, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(ParityCheck::from_alist("").is_err());
        assert!(ParityCheck::from_alist("7 3\n3 4\n").is_err());
        // column list inconsistent with rows
        let bad = HAMMING.replacen("1 0 0\n2 0 0", "2 0 0\n1 0 0", 1);
        assert!(ParityCheck::from_alist(&bad).is_err());
        // nonzero padding
        let bad = HAMMING.replacen("1 0 0\n", "1 0 5\n", 1);
        assert!(ParityCheck::from_alist(&bad).is_err());
        assert!(ParityCheck::from_alist(&format!("{HAMMING} 9")).is_err());
        assert!(ParityCheck::from_alist(&HAMMING.replace("1 4 5 7", "1 4 5 x")).is_err());
    }
}
