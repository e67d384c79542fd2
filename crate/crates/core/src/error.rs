use std::path::PathBuf;

use crate::lp::SolveStatus;
use crate::model::{ClassLabel, SkillId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("team references unknown worker {0}")]
    InvalidTeam(usize),
    #[error("task {task} is not coverable: no worker has skill(s) {missing:?}")]
    UncoverableTask { task: u64, missing: Vec<SkillId> },
    #[error("no price recorded for skill {0}")]
    MissingPrice(SkillId),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed LP model: {0}")]
    MalformedModel(String),
    #[error("LP solution is not optimal (status {0:?})")]
    NotOptimal(SolveStatus),
    #[error("need {needed} unhired {class} workers, only {available} available")]
    InsufficientWorkers {
        class: ClassLabel,
        needed: usize,
        available: usize,
    },
    #[error("no fair cover found")]
    FairCoverNotFound,
    #[error("fair LP relaxation is infeasible")]
    LpInfeasible,
    #[error("LP solver hit its iteration limit")]
    LpIterationLimit,
    #[error("rounding budget exhausted after {0} restarts")]
    RoundingBudgetExhausted(u32),
    #[error("instance too large for exhaustive search: {size} > {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("duplicate worker id {0}")]
    DuplicateWorkerId(u64),
    #[error("{path}:{line}: unknown class label `{label}`")]
    UnknownClassLabel {
        path: PathBuf,
        line: u64,
        label: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("report has no rows for algorithm `{0}`")]
    MissingAlgorithm(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short status token used in benchmark reports.
    pub fn status_token(&self) -> &'static str {
        match self {
            Error::UncoverableTask { .. } => "UncoverableTask",
            Error::InsufficientWorkers { .. } | Error::FairCoverNotFound => "FairCoverNotFound",
            Error::LpInfeasible => "LPInfeasible",
            Error::LpIterationLimit => "LPIterationLimit",
            Error::RoundingBudgetExhausted(_) => "RoundingBudgetExhausted",
            _ => "Error",
        }
    }
}
