//! Rate-1/2 LDPC coding, frame interleaving and the turbo MRC loop.

mod alist;
mod interleaver;
mod ldpc;
mod peg;
mod turbo;

pub use alist::ParityCheck;
pub use interleaver::Interleaver;
pub use ldpc::{DecodeOutput, LdpcCode, MAX_DECODER_ITERS, MIN_SUM_SCALE};
pub use peg::peg_construct;
pub use turbo::{
    coded_mrc, encode_frame, turbo_detect, CodedFrame, IdentityDecoder, SoftDecoder, TurboConfig,
    TurboOutput,
};
