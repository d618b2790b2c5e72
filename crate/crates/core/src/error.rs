use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("images are not ordered left to right: map {index} starts before map {prev} ends")]
    OrderingViolation { index: usize, prev: usize },
    #[error("images of maps {left} and {right} overlap in more than one point")]
    OverlapViolation { left: usize, right: usize },
    #[error("first image must start at a and last image must end at b")]
    EndpointViolation,
    #[error("similarity ratio of map {index} is not in (0, 1)")]
    RatioViolation { index: usize },
    #[error("an IFS needs at least two maps, got {0}")]
    TooFewMaps(usize),
    #[error("interval endpoints must satisfy a < b")]
    EmptyInterval,
    #[error("digit {digit} is out of range for an IFS with {n_maps} maps")]
    InvalidDigit { digit: usize, n_maps: usize },
    #[error("{requested} words exceed the enumeration cap of {cap}")]
    BudgetExceeded { requested: u128, cap: u64 },
    #[error("function node is incompatible with the IFS: {0}")]
    IncompatibleIfs(String),
    #[error("digit-weighted function has no closed-form tail (ratio {0})")]
    MissingTailForm(String),
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("Hölder exponents too small: sum of r_s^(alpha+beta) is {sigma}, not below 1")]
    ExponentTooSmall { sigma: String },
    #[error("substitution map is not well defined: {0}")]
    NotWellDefined(String),
    #[error("digit map is not a permutation: {0}")]
    NotBijective(String),
    #[error("function cannot be evaluated at an arbitrary point: {0}")]
    NotPointwise(String),
    #[error("cannot parse scalar {0:?}")]
    ScalarParse(String),
    #[error("cannot parse function expression at byte {pos}: {msg}")]
    ExprParse { pos: usize, msg: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed IFS description: {0}")]
    IfsFormat(String),
}
