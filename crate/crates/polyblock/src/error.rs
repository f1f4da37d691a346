use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("tolerance must be positive and finite, got {name} = {value}")]
    InvalidTolerance { name: &'static str, value: f64 },
    #[error("box corner must be finite and non-negative (coordinate {index} = {value})")]
    InvalidBox { index: usize, value: f64 },
    #[error("point has dimension {got}, problem has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the origin is not in the normal set; projection along rays from 0 is undefined")]
    OriginNotNormal,
}
