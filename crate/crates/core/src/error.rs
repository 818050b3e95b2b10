use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// An input that must be non-empty was empty.
    Empty(&'static str),
    /// A level or quantile outside `[0, 1]`.
    InvalidLevel(f64),
    NonFinite(&'static str),
    NegativeOutcome(f64),
    DimensionMismatch { expected: usize, found: usize },
    InvalidFractions,
    EmptySplit(&'static str),
    SingularSystem,
    /// Only one outcome class (zero / non-zero) was present.
    OneClass(&'static str),
    InvalidParameter(&'static str),
    LengthMismatch { left: usize, right: usize },
    InsufficientData { needed: usize, found: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Empty(what) => write!(f, "{what} is empty"),
            Error::InvalidLevel(q) => write!(f, "level {q} is outside [0, 1]"),
            Error::NonFinite(what) => write!(f, "{what} contains a non-finite value"),
            Error::NegativeOutcome(y) => write!(f, "outcome {y} is negative"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} features, found {found}")
            }
            Error::InvalidFractions => {
                write!(f, "split fractions must be non-negative and sum to 1")
            }
            Error::EmptySplit(name) => write!(f, "split `{name}` would be empty"),
            Error::SingularSystem => write!(f, "linear system is singular"),
            Error::OneClass(what) => write!(f, "{what} contains a single outcome class"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::InsufficientData { needed, found } => {
                write!(f, "need more than {needed} samples, found {found}")
            }
        }
    }
}

impl core::error::Error for Error {}
