use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("security parameter must be at least 2 (got {0})")]
    InvalidLambda(u32),

    #[error("invalid parameter profile: {0}")]
    InvalidProfile(String),

    #[error("noise bound of {noise_bits} bits reaches the decryption limit of {limit} bits")]
    NoiseOverflow { noise_bits: u32, limit: u32 },

    #[error("ciphertext carries no squashing hint, or the key has no sparse subset")]
    MissingHint,

    #[error("ciphertext of {bits} bits exceeds the {limit}-bit hint precision")]
    HintPrecision { bits: u64, limit: u64 },

    #[error("symmetric-mode keys encrypt only with the secret key")]
    SecretKeyRequired,

    #[error("operands come from different parameter profiles")]
    ProfileMismatch,

    #[error("word widths differ ({left} vs {right})")]
    WidthMismatch { left: usize, right: usize },

    #[error("word of width {width} is narrower than the required {min} bits")]
    TooNarrow { width: usize, min: usize },

    #[error("split comparison needs an even width (got {0})")]
    OddWidth(usize),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("could not build a connected topology after {0} attempts")]
    Disconnected(u32),

    #[error("greedy route discovery stalled at node {0}")]
    NoRoute(usize),

    #[error("adapter bundle does not fit the public circuit shape: {0}")]
    ShapeMismatch(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
