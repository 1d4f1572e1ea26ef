use thiserror::Error;

/// Errors produced by the solvers, model code and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("measure is empty")]
    EmptyMeasure,

    #[error("invalid mass vector: {0}")]
    InvalidMass(String),

    #[error("total masses differ: {source_mass} vs {target_mass}")]
    MassMismatch { source_mass: f64, target_mass: f64 },

    #[error("transported mass {mass} outside [0, {max}]")]
    MassOutOfRange { mass: f64, max: f64 },

    #[error("invalid cost matrix: {0}")]
    InvalidCost(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("entropic solver did not converge after {iterations} iterations (marginal violation {violation:e})")]
    NotConverged { iterations: usize, violation: f64 },

    #[error("kernel exp(-C/eps) underflows for eps = {epsilon:e}")]
    KernelUnderflow { epsilon: f64 },

    #[error("class {0} has no samples")]
    EmptyClass(usize),

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
