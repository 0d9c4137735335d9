use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HcrError {
    #[error("order {order} exceeds the family's max order {max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("value {value} lies outside [0, 1]")]
    OutOfUnitInterval { value: f64 },
    #[error("value {value} is not a point of the {levels}-level grid")]
    OffGrid { value: f64, levels: usize },
    #[error("coordinate {0} is missing")]
    MissingCoordinate(usize),
    #[error("coordinate {index} is out of range for dimension {dim}")]
    CoordinateOutOfRange { index: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("table has no data rows")]
    EmptyTable,
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("row {row}, column {column:?}: cannot parse {cell:?} as a number")]
    NonNumeric {
        row: usize,
        column: String,
        cell: String,
    },
    #[error("table: {0}")]
    Table(String),
    #[error("coordinate has fewer than 2 distinct values")]
    ConstantCoordinate,
    #[error("value {value} is outside the transform's domain")]
    OutsideDomain { value: f64 },
    #[error("learning rate {0} is not in (0, 1)")]
    InvalidRate(f64),
    #[error("nonpositive conditional mass: denominator {denominator}")]
    NonPositiveMass { denominator: f64 },
    #[error("nonpositive density at records {records:?}")]
    NonPositiveDensity { records: Vec<usize> },
    #[error("no complete records to evaluate the likelihood on")]
    NoCompleteRecords,
    #[error("record has no missing coordinates")]
    RecordComplete,
    #[error("positivity backtracking exhausted after {halvings} reductions at step {step}")]
    BacktrackExhausted { step: usize, halvings: usize },
    #[error("witness density {density} is already at or above the margin {margin}")]
    WitnessNotNegative { density: f64, margin: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("schema line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("model file line {line}: {message}")]
    ModelFormat { line: usize, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for HcrError {
    fn from(e: std::io::Error) -> Self {
        HcrError::Io(e.to_string())
    }
}

pub type Result<T, E = HcrError> = std::result::Result<T, E>;
