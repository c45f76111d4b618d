use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("duplicate point: indices {0} and {1} are at distance zero")]
    DuplicatePoint(usize, usize),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("restriction produced an empty subspace")]
    EmptySubspace,
    #[error("space has {size} points, exact solver limit is {limit}")]
    SizeLimit { size: usize, limit: usize },
    #[error("molecule does not match the space: {0}")]
    BadMolecule(String),
    #[error("coverage gap in interval family at u = {0}")]
    CoverageGap(f64),
    #[error("weight of part {part} is nonzero outside its subspace (u = {u})")]
    SupportMismatch { part: usize, u: f64 },
    #[error("interval family rejected: {0}")]
    BadFamily(String),
    #[error("missing amenability map for part {0}")]
    MissingAmenability(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("internal invariant broken: {0}")]
    InternalInvariantBroken(String),
    #[error("space needs at least two points")]
    TooSmall,
    #[error("subset rejected: {0}")]
    BadSubset(String),
    #[error("sample is not closed under the scaling map: point {point} has no partner within tolerance (nearest gap {gap:e})")]
    NotSigmaClosed { point: usize, gap: f64 },
    #[error("sample contains the north pole (index {0})")]
    PoleInDomain(usize),
    #[error("operation needs an embedded space (coordinates)")]
    NotEmbedded,
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
