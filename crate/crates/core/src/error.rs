use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("alphabet size {0} outside 2..=256")]
    InvalidAlphabet(usize),

    #[error("symbol {symbol} at position {position} is not below alphabet size {alphabet}")]
    InvalidSymbol {
        symbol: u8,
        position: usize,
        alphabet: usize,
    },

    #[error("requested depth {requested} exceeds model depth {max}")]
    DepthExceeded { requested: usize, max: usize },

    #[error("empirical measure needs at least 2 blocks, have {blocks}")]
    InsufficientBlocks { blocks: usize },

    #[error("context has zero empirical probability")]
    UnseenContext,

    #[error("sequence of length {len} is shorter than the required {needed}")]
    SequenceTooShort { len: usize, needed: usize },

    #[error("block has length {actual}, expected {expected}")]
    BlockLength { expected: usize, actual: usize },

    #[error("training sequence of length {len} needs at least {needed} symbols")]
    InsufficientTraining { len: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("decode failure at symbol {position}: {reason}")]
    DecodeFailure { position: usize, reason: &'static str },

    #[error("format error: {0}")]
    Format(&'static str),

    #[error("length function violates the Kraft inequality (sum = {0})")]
    KraftViolation(f64),

    #[error("distortion radius {radius} is too large for exhaustive search at block length {block_len}")]
    RadiusTooLarge { radius: usize, block_len: usize },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
