use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("relative accuracy must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("bucket limit must be at least {min}, got {got}")]
    InvalidBucketLimit { min: usize, got: usize },
    #[error("quantile must lie in [0, 1], got {0}")]
    InvalidQuantile(f64),
    #[error("value {0} is not finite")]
    NonFiniteValue(f64),
    #[error("value {0} is outside the indexable range")]
    ValueOutOfRange(f64),
    #[error("bucket {index} would overflow its 64-bit counter")]
    CountOverflow { index: i32 },
    #[error("cannot remove {requested} from bucket {index} holding {present}")]
    CountUnderflow {
        index: i32,
        requested: u64,
        present: u64,
    },
    #[error("query on an empty sketch")]
    EmptySketch,
    #[error("sketches use incompatible index mappings")]
    IncompatibleMapping,
    #[error("sketches use different bucket limits ({0:?} vs {1:?})")]
    IncompatibleBucketLimit(Option<usize>, Option<usize>),
    #[error("malformed payload: {0}")]
    Malformed(String),
    #[error("unsupported payload version {0}")]
    UnknownVersion(u8),
    #[error("unknown mapping kind {0}")]
    UnknownMappingKind(u8),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty data set")]
    EmptyData,
    #[error("relative error is undefined for an exact value of zero")]
    ExactZero,
}
