use std::path::PathBuf;

use thiserror::Error;

use crate::params::Violation;

#[derive(Debug, Error)]
pub enum ParamsError {
    #[error("invalid parameters:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("no admissible reaction exponent: window [{lower}, {upper}) is empty")]
    NoAdmissibleS { lower: f64, upper: f64 },
    #[error("time horizon must be positive, got {0}")]
    Horizon(f64),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("- {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid needs at least {needed} nodes per axis, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("unsupported dimension {0}")]
    Dimension(usize),
    #[error("grid spacing must be positive, got {0}")]
    Spacing(f64),
    #[error("value count {got} does not match grid size {expected}")]
    Shape { expected: usize, got: usize },
    #[error("grids differ")]
    GridMismatch,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("non-finite value at node {node} after step {step} (t = {time})")]
    Unstable { step: usize, node: usize, time: f64 },
    #[error("step budget of {max_steps} exhausted at t = {time} before t_end = {t_end}")]
    StepBudget {
        max_steps: usize,
        time: f64,
        t_end: f64,
    },
    #[error("undershoot persisted after {halvings} step halvings at t = {time}")]
    Undershoot { halvings: usize, time: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("trajectory ends at t = {end} before the requested t = {requested}")]
    Horizon { requested: f64, end: f64 },
    #[error("snapshot spacing {spacing} exceeds T/200 = {limit}")]
    Cadence { spacing: f64, limit: f64 },
    #[error("functional index {n} exceeds n_max = {n_max}")]
    Index { n: usize, n_max: usize },
    #[error("the no-reaction threshold check requires A = 0")]
    ReactionActive,
    #[error("invalid certificate input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
}

impl IoError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        IoError::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("time must be positive, got {0}")]
    Time(f64),
    #[error("invalid Barenblatt parameters: {0}")]
    Spec(String),
}

#[derive(Debug, Error)]
pub enum WalkerError {
    #[error("invalid walker configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}
