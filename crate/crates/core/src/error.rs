use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame configuration: {0}")]
    InvalidConfig(String),

    #[error("bit count {bits} is not a multiple of {bits_per_symbol} bits per symbol")]
    BitCount { bits: usize, bits_per_symbol: usize },

    #[error("expected {expected} symbols, got {got}")]
    SymbolCount { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("transmit grid row {row} must be null (rows >= {first_null} carry no data)")]
    NullRowViolation { row: usize, first_null: usize },

    #[error("path delay tap {delay} exceeds l_max = {l_max}")]
    DelayOutOfRange { delay: usize, l_max: usize },

    #[error("doppler tap {doppler} violates |k| < N/2 = {half}")]
    DopplerOutOfRange { doppler: i64, half: usize },

    #[error("combiner spectrum is zero at row {row}, bin {bin}; set a positive epsilon")]
    SingularCombiner { row: usize, bin: usize },

    #[error("external initialisation requested but no initial estimate supplied")]
    MissingInitialEstimate,

    #[error("alist parse error: {0}")]
    Alist(String),

    #[error("parity-check matrix is rank deficient (rank {rank} < {rows} checks)")]
    RankDeficient { rank: usize, rows: usize },

    #[error("frame carries {capacity} coded bits, not a multiple of the code length {code_len}")]
    CapacityMismatch { capacity: usize, code_len: usize },

    #[error("unknown detector `{0}`")]
    UnknownDetector(String),

    #[error("invalid channel file: {0}")]
    ChannelFile(String),

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("dense reference limited to {cap} entries per side, got {got}")]
    SizeCap { cap: usize, got: usize },

    #[error("no records to write")]
    EmptyRecords,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
