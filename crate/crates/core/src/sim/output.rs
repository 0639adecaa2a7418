use std::io::{Read, Write};
use std::path::Path;

use super::MetricRecord;
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 12] = [
    "snr_db",
    "detector",
    "bits",
    "bit_errors",
    "frames",
    "frame_errors",
    "ber",
    "fer",
    "otfs_frames",
    "iterative_mults",
    "total_mults",
    "wall_time_s",
];

/// Writes a header and one row per record. The timing column is present only
/// when the records carry timings.
pub fn write_csv<W: Write>(records: &[MetricRecord], out: W) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let timed = records.iter().any(|r| r.wall_time_s.is_some());
    let width = if timed {
        CSV_COLUMNS.len()
    } else {
        CSV_COLUMNS.len() - 1
    };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&CSV_COLUMNS[..width])?;
    for r in records {
        let mut row = vec![
            r.snr_db.to_string(),
            r.detector.clone(),
            r.bits.to_string(),
            r.bit_errors.to_string(),
            r.frames.to_string(),
            r.frame_errors.to_string(),
            r.ber.to_string(),
            r.fer.to_string(),
            r.otfs_frames.to_string(),
            r.iterative_mults.to_string(),
            r.total_mults.to_string(),
        ];
        if timed {
            row.push(r.wall_time_s.map(|t| t.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[MetricRecord], path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let mut buf = Vec::new();
    write_csv(records, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|_| {
        Error::InvalidSpec(format!(
            "CSV column {} has unparsable value {raw:?}",
            CSV_COLUMNS[i]
        ))
    })
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<MetricRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers()?.clone();
    let timed = header.len() == CSV_COLUMNS.len();
    if !header
        .iter()
        .eq(CSV_COLUMNS[..header.len()].iter().copied())
        || header.len() + 1 < CSV_COLUMNS.len()
    {
        return Err(Error::InvalidSpec(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        out.push(MetricRecord {
            snr_db: field(&rec, 0)?,
            detector: rec.get(1).unwrap_or("").to_string(),
            bits: field(&rec, 2)?,
            bit_errors: field(&rec, 3)?,
            frames: field(&rec, 4)?,
            frame_errors: field(&rec, 5)?,
            ber: field(&rec, 6)?,
            fer: field(&rec, 7)?,
            otfs_frames: field(&rec, 8)?,
            iterative_mults: field(&rec, 9)?,
            total_mults: field(&rec, 10)?,
            wall_time_s: if timed && !rec.get(11).unwrap_or("").is_empty() {
                Some(field(&rec, 11)?)
            } else {
                None
            },
        });
    }
    Ok(out)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    parse_csv(std::fs::File::open(path)?)
}

/// Fixed-width table for terminals.
pub fn summary_table(records: &[MetricRecord]) -> String {
    let mut s = format!(
        "{:>8}  {:<16} {:>12} {:>10} {:>12} {:>10} {:>8}\n",
        "snr_db", "detector", "ber", "bit_err", "fer", "frame_err", "frames"
    );
    for r in records {
        s += &format!(
            "{:>8}  {:<16} {:>12.4e} {:>10} {:>12.4e} {:>10} {:>8}\n",
            r.snr_db, r.detector, r.ber, r.bit_errors, r.fer, r.frame_errors, r.otfs_frames
        );
    }
    s
}
