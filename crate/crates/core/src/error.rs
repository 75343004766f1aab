use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("point ({x:.3}, {y:.3}) is not inside any traversable cell")]
    PointBlocked { x: f64, y: f64 },
    #[error("start configuration does not satisfy team connectivity")]
    StartsDisconnected,
    #[error("goal configuration does not satisfy team connectivity")]
    GoalsDisconnected,
    #[error("instance sampling gave up after {attempts} attempts")]
    SamplingExhausted { attempts: usize },
    #[error("solution has {solution} paths but the instance has {instance} agents")]
    MismatchedInstance { instance: usize, solution: usize },
    #[error("map content hash mismatch for {path}: expected {expected}, found {found}")]
    MapHashMismatch {
        path: String,
        expected: String,
        found: String,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
