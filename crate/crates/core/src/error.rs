use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration budget exceeded: {what} needs {needed} items, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("point ({x}, {y}) is not a grid point at resolution g={g}")]
    Snap { x: f64, y: f64, g: u32 },

    #[error("duplicate grid cell ({ix}, {iy})")]
    Duplicate { ix: u32, iy: u32 },

    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("set size {n} outside supported range {min}..={max}")]
    Size { n: usize, min: usize, max: usize },

    #[error("invalid witness: {0}")]
    Witness(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("construction error: {0}")]
    Construction(String),

    #[error("square (t={scale}, ix={ix}, iy={iy}) has no backtrack; use the zig-zag path")]
    CaseB { scale: u32, ix: u32, iy: u32 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("config error in field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
