use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point must have at least one coordinate")]
    EmptyPoint,

    #[error("coordinate {index} is {value}, expected a finite non-negative real")]
    InvalidCoordinate { index: usize, value: f64 },

    #[error("{what} needs n >= {required}, got n = {got}")]
    DimensionTooSmall {
        what: &'static str,
        required: usize,
        got: usize,
    },

    #[error("{what} is limited to n <= {max}, got n = {got}")]
    TooLarge {
        what: &'static str,
        max: usize,
        got: usize,
    },

    #[error("k = {k} exceeds n = {n}")]
    KExceedsN { n: usize, k: usize },

    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("index {index} listed more than once")]
    DuplicateIndex { index: usize },

    #[error("coordinate {index} is zero; second partials diverge there")]
    ZeroCoordinate { index: usize },

    #[error("degenerate denominator: sqrt(x_k) + sqrt(x_n) = 0")]
    DegenerateDenominator,

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("O_k evaluation routes disagree: closed form {closed_form}, gradient route {gradient_route}")]
    RouteDisagreement {
        closed_form: f64,
        gradient_route: f64,
    },

    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
