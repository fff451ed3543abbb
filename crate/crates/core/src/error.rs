use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex not found: {0}")]
    VertexNotFound(String),
    #[error("edge not found: {0}")]
    EdgeNotFound(String),
    #[error("level {level} out of range (depth {depth})")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("thermal data missing: {0}")]
    ThermalDataMissing(String),
    #[error("invalid thermal data: {0}")]
    InvalidThermal(String),
    #[error("numeric mode conflict: {0}")]
    NumericModeConflict(String),
    #[error("infinite partition function at {0}")]
    InfinitePartitionFunction(String),
    #[error("dimension {dim} exceeds the dense-matrix limit {limit}")]
    DimensionLimitExceeded { dim: u128, limit: usize },
    #[error("dimension overflow at {0}")]
    DimensionOverflow(String),
    #[error("inadmissible gauge: path sums into {0} disagree")]
    InadmissibleGauge(String),
    #[error("levels {upper} and {lower} are not adjacent")]
    NonAdjacentLevels { upper: usize, lower: usize },
    #[error("level order violated: {upper} must exceed {lower}")]
    LevelOrderViolation { upper: usize, lower: usize },
    #[error("measure puts mass on the infinite vertex {0}")]
    MassOnInfiniteVertex(String),
    #[error("observable missing or mis-sized at {0}")]
    MissingObservable(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid cylinder: {0}")]
    InvalidCylinder(String),
    #[error("zero-mass vertex reached: {0}")]
    ZeroMassVertex(String),
    #[error("infinite vertex on path: {0}")]
    InfiniteVertexOnPath(String),
    #[error("invalid link: {0}")]
    InvalidLink(String),
    #[error("beta must be non-zero")]
    BetaZero,
    #[error("graph mismatch")]
    GraphMismatch,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("depth {depth} exceeds the limit {limit}")]
    DepthLimit { depth: usize, limit: usize },
    #[error("parse error: {0}")]
    Parse(String),
}
