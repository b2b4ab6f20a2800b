use crate::metric::PointId;

/// Errors produced by the clustering core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A dataset must hold at least one point.
    #[error("dataset is empty")]
    EmptyDataset,
    /// Coordinates must be finite.
    #[error("point {point} has a non-finite coordinate at dimension {dim}")]
    NonFinite {
        /// Offending point.
        point: usize,
        /// Offending coordinate index.
        dim: usize,
    },
    /// The flat coordinate buffer does not divide evenly into points.
    #[error("coordinate buffer of length {len} is not a multiple of dimension {dim}")]
    RaggedData {
        /// Buffer length.
        len: usize,
        /// Declared dimension.
        dim: usize,
    },
    /// Rows passed to [`crate::Dataset::from_rows`] differ in width.
    #[error("row {row} has {found} coordinates, expected {expected}")]
    RowWidth {
        /// Offending row.
        row: usize,
        /// Width of the first row.
        expected: usize,
        /// Width of the offending row.
        found: usize,
    },
    /// Too many points to be indexed by a 32-bit [`PointId`].
    #[error("dataset has {0} points, more than PointId can index")]
    TooManyPoints(usize),
    /// The angular distance is undefined for the zero vector.
    #[error("point {0} is the zero vector, which has no angle")]
    ZeroVector(PointId),
    /// A caller-side precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    /// Parameters are out of range for the dataset at hand.
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}

/// Shorthand for results carrying [`Error`].
pub type Result<T> = core::result::Result<T, Error>;
