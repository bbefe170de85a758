use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised across ingestion, estimation and tail analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("row error at line {line}: {message}")]
    Row { line: u64, message: String },

    #[error("duplicate record for {date} hour {hour}")]
    DuplicateKey { date: NaiveDate, hour: u8 },

    #[error("unrecoverable gap on {date}: missing hours {missing:?}")]
    UnrecoverableGap { date: NaiveDate, missing: Vec<u8> },

    #[error("missing days for hour {hour}: {dates:?}")]
    MissingDays { hour: u8, dates: Vec<NaiveDate> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("optimization did not converge after {iterations} iterations: {message}")]
    Optimization {
        message: String,
        iterations: usize,
        last_iterate: Vec<f64>,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("family {family} infeasible for empirical tau {tau:.4}")]
    FamilyInfeasible { family: String, tau: f64 },

    #[error("family selection failed: {0}")]
    Selection(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

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
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Schema(_) => "schema",
            Error::Row { .. } => "row",
            Error::DuplicateKey { .. } => "duplicate_key",
            Error::UnrecoverableGap { .. } => "unrecoverable_gap",
            Error::MissingDays { .. } => "missing_days",
            Error::Domain(_) => "domain",
            Error::DegenerateVariance(_) => "degenerate_variance",
            Error::Optimization { .. } => "optimization",
            Error::Numerical(_) => "numerical",
            Error::FamilyInfeasible { .. } => "family_infeasible",
            Error::Selection(_) => "selection",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::Resolution(_) => "resolution",
            Error::Unsupported(_) => "unsupported",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// Location hint (line number, date, path) when the error carries one.
    pub fn location(&self) -> Option<String> {
        match self {
            Error::Row { line, .. } => Some(format!("line {line}")),
            Error::DuplicateKey { date, hour } => Some(format!("{date} hour {hour}")),
            Error::UnrecoverableGap { date, .. } => Some(date.to_string()),
            Error::Io { path, .. } => Some(path.display().to_string()),
            Error::Csv(e) => e.position().map(|p| format!("line {}", p.line())),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
