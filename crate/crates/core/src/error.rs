use thiserror::Error;

/// Errors produced by index computations and data-model validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unit {unit_id} has a negative count")]
    NegativeCount { unit_id: String },

    #[error("unit {unit_id} has zero population")]
    ZeroPopulation { unit_id: String },

    #[error("region has no population")]
    EmptyRegion,

    #[error("unit {unit_id} is not assigned to a district")]
    UnassignedUnit { unit_id: String },

    #[error("group {group} is not assigned to a supergroup")]
    UnassignedGroup { group: String },

    #[error("support violation: group {group} has mass in P but none in Q")]
    SupportViolation { group: String },

    #[error("region entropy is zero; the index is undefined for a single-group region")]
    DegenerateRegion,

    #[error("group {label} is missing or has zero total population")]
    MissingGroup { label: String },

    #[error("weighted mean is zero; the index is undefined")]
    ZeroMean,

    #[error("district {district_id} has no population")]
    EmptyDistrict { district_id: String },

    #[error("unit {unit_id} has no coordinates")]
    MissingCoordinates { unit_id: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("log base must resolve to at least two groups, got {0}")]
    DegenerateBase(usize),

    #[error("populated unit {unit_id} has an empty smoothed neighborhood")]
    EmptyNeighborhood { unit_id: String },
}

pub type Result<T> = std::result::Result<T, Error>;
