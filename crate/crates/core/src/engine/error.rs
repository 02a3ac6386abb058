use thiserror::Error;

use super::key::{CompId, LocationKey, Pid, Round};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("{comp}: read of absent location {key}")]
    AbsentRead { comp: CompId, key: LocationKey },

    #[error("{comp}: location {key} was written in round {written} and is not visible yet")]
    InvisibleRead {
        comp: CompId,
        key: LocationKey,
        written: Round,
    },

    #[error("write-once violation at {key}: written by {existing}, rewritten by {writer}")]
    WriteConflict {
        key: LocationKey,
        existing: String,
        writer: CompId,
    },

    #[error("location {key} is written by {writer} and cannot be used as an input")]
    NotAnInput { key: LocationKey, writer: CompId },

    #[error("changed location {0} was never written and is not an input")]
    UnknownLocation(LocationKey),

    #[error("process {0} is both added and removed")]
    ConflictingDelta(Pid),

    #[error("process {0} already exists")]
    DuplicateProcess(Pid),

    #[error("process {0} does not exist")]
    UnknownProcess(Pid),

    #[error("no processes to run")]
    EmptyProcessSet,

    #[error("execution exceeded the limit of {0} rounds")]
    RoundLimit(Round),

    #[error("{comp}: {message}")]
    Program { comp: CompId, message: String },

    #[error("engine state is inconsistent after an earlier error")]
    Poisoned,

    #[error("internal error: {0}")]
    Internal(String),
}
