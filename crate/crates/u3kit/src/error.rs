use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operands belong to different groups or have the wrong shape")]
    SpecMismatch,
    #[error("enumeration of {needed} items exceeds the budget of {cap}")]
    BudgetExceeded { needed: u128, cap: u128 },
    #[error("degree {0} is not supported (expected 1..=4)")]
    DegreeUnsupported(usize),
    #[error("group of even order {0}")]
    EvenOrder(u64),
    #[error("gcd(N, (k-1)!) != 1 for N = {n}, k = {k}")]
    BadGroupOrder { n: u64, k: usize },
    #[error("set contains a proper {0}-term progression")]
    HasProperAp(usize),
    #[error("N = {n} is below the required {required}")]
    TooSmallN { n: u64, required: f64 },
    #[error("no object with the requested property was found: {0}")]
    NotFound(String),
    #[error("set does not contain 0")]
    NoZero,
    #[error("density {density} is below the required {required}")]
    DensityTooLow { density: f64, required: f64 },
    #[error("Bohr set is not regular")]
    NotRegular,
    #[error("radius {0} is too large (need rho < 1/4)")]
    RhoTooLarge(f64),
    #[error("lattice rank collapsed: {0}")]
    RankCollapse(String),
    #[error("phase is not quadratic: {0}")]
    NotQuadratic(String),
    #[error("phase cannot be extended to the whole group: {0}")]
    NotExtendable(String),
    #[error("coset progression is not proper")]
    NotProper,
    #[error("progression generators are dependent")]
    DependentGenerators,
    #[error("phase-derivative graph is empty")]
    EmptyGraph,
    #[error("linear component subspace is trivial")]
    EmptyV,
    #[error("random slicing failed after {0} retries")]
    SliceFailed(usize),
    #[error("bracket quadratic has {0} frequencies (at most 4 allowed)")]
    TooManyFrequencies(usize),
    #[error("points violate the Hall-Petresco constraint (defect {0})")]
    NotInSigma(f64),
    #[error("expected {expected} points, got {got}")]
    BadArity { expected: usize, got: usize },
    #[error("N = {0} must be odd")]
    EvenN(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("N = {n} is too small (need at least {min})")]
    TooSmall { n: u64, min: u64 },
    #[error("set contains a four-term progression")]
    Has4Ap,
    #[error("pipeline produced no obstruction: {0}")]
    PipelineEmpty(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable variant name used in machine-readable error reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::SpecMismatch => "SpecMismatch",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::DegreeUnsupported(_) => "DegreeUnsupported",
            Error::EvenOrder(_) => "EvenOrder",
            Error::BadGroupOrder { .. } => "BadGroupOrder",
            Error::HasProperAp(_) => "HasProperAp",
            Error::TooSmallN { .. } => "TooSmallN",
            Error::NotFound(_) => "NotFound",
            Error::NoZero => "NoZero",
            Error::DensityTooLow { .. } => "DensityTooLow",
            Error::NotRegular => "NotRegular",
            Error::RhoTooLarge(_) => "RhoTooLarge",
            Error::RankCollapse(_) => "RankCollapse",
            Error::NotQuadratic(_) => "NotQuadratic",
            Error::NotExtendable(_) => "NotExtendable",
            Error::NotProper => "NotProper",
            Error::DependentGenerators => "DependentGenerators",
            Error::EmptyGraph => "EmptyGraph",
            Error::EmptyV => "EmptyV",
            Error::SliceFailed(_) => "SliceFailed",
            Error::TooManyFrequencies(_) => "TooManyFrequencies",
            Error::NotInSigma(_) => "NotInSigma",
            Error::BadArity { .. } => "BadArity",
            Error::EvenN(_) => "EvenN",
            Error::NotPrime(_) => "NotPrime",
            Error::TooSmall { .. } => "TooSmall",
            Error::Has4Ap => "Has4Ap",
            Error::PipelineEmpty(_) => "PipelineEmpty",
            Error::Parse { .. } => "ParseError",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
