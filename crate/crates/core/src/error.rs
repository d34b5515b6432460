use core::fmt;

/// Errors reported by box construction, mixing, wiring and distillation.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A box family needs `d ≥ 2`.
    DimensionTooSmall { d: usize },
    /// Two boxes (or a box and a wiring) disagree on `d`.
    DimensionMismatch { left: usize, right: usize },
    /// An operation that needs a probability table got the symbolic
    /// infinite-dimension limit.
    InfiniteDimension,
    /// A mixture needs at least one component.
    EmptyMixture,
    /// Component and weight counts differ.
    WeightCountMismatch { boxes: usize, weights: usize },
    /// Mixture weights must sum to 1.
    WeightSum { sum: f64 },
    /// The convex mixture constructor rejects negative weights.
    NegativeWeight { weight: f64 },
    /// An affine combination produced an entry too negative to be a
    /// probability.
    NegativeEntry { value: f64 },
    /// A probability table entry was NaN or infinite.
    NonFiniteEntry,
    /// A raw table has the wrong number of entries for its dimension.
    TableShape { expected: usize, actual: usize },
    /// A wiring table value (output symbol or comparator argument) is
    /// outside `{0, …, d−1}`.
    SymbolOutOfRange { value: usize, d: usize },
    /// A wiring input-map value is not a bit.
    BitOutOfRange { value: usize },
    /// A nonlocal-fraction parameter is outside `[0, 1]`.
    EpsilonRange { value: f64 },
    /// Noisy-polytope weights must satisfy `ξ, γ ≥ 0` and `ξ + γ ≤ 1`.
    NoisyWeights { xi: f64, gamma: f64 },
    /// Iterated distillation is defined for the protocol's own two-box
    /// family only.
    ProtocolFamilyMismatch,
    /// A sweep grid value is out of its domain.
    GridValue { value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionTooSmall { d } => {
                write!(f, "output dimension must be at least 2, got {d}")
            }
            Error::DimensionMismatch { left, right } => {
                write!(f, "dimension mismatch: {left} vs {right}")
            }
            Error::InfiniteDimension => {
                write!(
                    f,
                    "operation needs a finite dimension, got the infinite limit"
                )
            }
            Error::EmptyMixture => write!(f, "mixture needs at least one component"),
            Error::WeightCountMismatch { boxes, weights } => {
                write!(f, "{boxes} boxes but {weights} weights")
            }
            Error::WeightSum { sum } => write!(f, "weights must sum to 1, got {sum}"),
            Error::NegativeWeight { weight } => {
                write!(f, "convex mixture weight must be nonnegative, got {weight}")
            }
            Error::NegativeEntry { value } => {
                write!(f, "combination produced a negative probability {value}")
            }
            Error::NonFiniteEntry => write!(f, "probability table entry is not finite"),
            Error::TableShape { expected, actual } => {
                write!(f, "table needs {expected} entries, got {actual}")
            }
            Error::SymbolOutOfRange { value, d } => {
                write!(f, "symbol {value} out of range for dimension {d}")
            }
            Error::BitOutOfRange { value } => write!(f, "input map value {value} is not a bit"),
            Error::EpsilonRange { value } => {
                write!(f, "nonlocal fraction must lie in [0, 1], got {value}")
            }
            Error::NoisyWeights { xi, gamma } => {
                write!(
                    f,
                    "noisy weights need xi, gamma >= 0 and xi + gamma <= 1, got ({xi}, {gamma})"
                )
            }
            Error::ProtocolFamilyMismatch => {
                write!(
                    f,
                    "iterated distillation needs the protocol's own local family"
                )
            }
            Error::GridValue { value } => write!(f, "grid value {value} out of domain"),
        }
    }
}

impl core::error::Error for Error {}
