//! Regenerates the shipped parity-check matrices:
//!
//! ```text
//! cargo run --release --example gen_codes -- crates/core/codes
//! ```

use std::path::PathBuf;

use otfs_rake::coding::{peg_construct, LdpcCode};

fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "codes".into()));
    for n in [1024usize, 4096] {
        let (h, seed) = (0u64..)
            .find_map(|seed| {
                let h = peg_construct(n, n / 2, 3, seed).ok()?;
                LdpcCode::new(h.clone()).ok().map(|_| (h, seed))
            })
            .expect("some seed gives a full-rank matrix");
        let path = dir.join(format!("peg_{n}_r05.alist"));
        std::fs::write(&path, h.to_alist())?;
        println!("{}: n = {n}, seed = {seed}", path.display());
    }
    Ok(())
}
