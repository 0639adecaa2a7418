//! Seeded Monte-Carlo BER/FER campaigns.
//!
//! Every frame draws its channel, bits and noise from ChaCha streams keyed by
//! [`frame_seed`], and every detector in a campaign sees the same frames.
//! Frames are scheduled in fixed batches with stop rules evaluated between
//! batches, which keeps the output independent of the worker count.

mod campaign;
mod complexity;
mod output;
mod spec;

pub use campaign::{
    frame_seed, run_campaign, run_campaign_with, splitmix64, Execution, MetricRecord,
};
pub use complexity::{complexity_report, write_complexity_csv, ComplexityRecord, ComplexityTerms};
pub use output::{emit_csv, parse_csv, read_csv, summary_table, write_csv, CSV_COLUMNS};
pub use spec::{ChannelSpec, DetectorKind, DetectorSpec, SimSpec, StopRule};
