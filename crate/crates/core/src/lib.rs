//! Delay-Doppler (OTFS) link-level simulation toolkit.
//!
//! The centerpiece is [`detector`], an iterative maximal-ratio-combining rake
//! detector that works row by row on the delay-Doppler grid. Every circulant
//! channel product is evaluated in the Fourier domain so one detector pass
//! costs `N * M' * (3L + 1)` complex multiplications.
//!
//! Supporting modules:
//!
//! * [`frame`]: frame geometry, Gray QAM, grid mapping and the ML slicer.
//! * [`channel`]: sparse delay-Doppler channels (EVA or custom), Doppler
//!   spread tables and channel application.
//! * [`tf`]: single-tap time-frequency MMSE initializer and the CP-OFDM
//!   baseline.
//! * [`coding`]: alist LDPC codes, min-sum decoding, interleaving and the
//!   turbo MRC loop.
//! * [`sim`]: seeded Monte-Carlo BER/FER campaigns and CSV output.

pub mod channel;
pub mod coding;
pub mod detector;
mod error;
pub mod fourier;
pub mod frame;
pub mod sim;
pub mod tf;

#[cfg(any(test, feature = "oracle"))]
#[doc(hidden)]
pub mod dense;

pub use error::{Error, Result};

/// Complex sample type used throughout the crate.
pub type C64 = num_complex::Complex64;
