use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("utopia point unusable: {0}")]
    Utopia(String),
    #[error(
        "{count}+ subchannel assignments exceed the enumeration cap of {cap}; \
         use relaxed mode or smaller dimensions"
    )]
    EnumerationCap { count: usize, cap: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("results table has no `{0}` column")]
    MissingColumn(String),
    #[error(transparent)]
    Solver(#[from] polyblock::SolveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
