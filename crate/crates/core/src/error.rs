use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain on which a formula is defined.
    #[error("{what}: value {value} outside domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("region `{0}` is infeasible")]
    Infeasible(String),

    #[error("branch enumeration would produce {0} linear programs (limit {limit})", limit = crate::outage::MAX_BRANCHES)]
    BranchExplosion(u64),

    #[error("objective is unbounded below on region `{0}`")]
    Unbounded(String),

    #[error("branch-LP infimum {lp} and grid infimum {grid} disagree beyond {tol}")]
    OracleDisagreement { lp: f64, grid: f64, tol: f64 },

    #[error("curves cross at an irrational point on [{lo}, {hi}]")]
    IrrationalCrossing { lo: f64, hi: f64 },

    #[error("slope estimate needs at least {needed} error events per point; point {index} has {got}")]
    InsufficientEvents { index: usize, got: u64, needed: u64 },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown curve id `{0}`")]
    UnknownCurve(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, domain: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            domain: domain.into(),
        }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
