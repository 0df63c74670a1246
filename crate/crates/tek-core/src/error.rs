// SPDX-License-Identifier: Apache-2.0

//! Error types shared across the crate.

use crate::types::Tid;

/// Scheduler-facing failures: bad parameters or impossible requests.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SchedError {
    #[error("nice value {0} outside [-20, 19]")]
    NiceOutOfRange(i8),
    #[error("no runnable threads")]
    NoRunnableThreads,
    #[error("unknown thread {0}")]
    UnknownThread(Tid),
    #[error("thread {0} already admitted")]
    DuplicateThread(Tid),
    #[error("thread {0} is not runnable")]
    NotRunnable(Tid),
    #[error("thread {0} is not blocked")]
    NotBlocked(Tid),
    #[error("unknown group {0}")]
    UnknownGroup(String),
    #[error("group shares must be positive")]
    NonPositiveGroupShare,
}

/// Stack-model failures that abort an operation (distinct from fault
/// events, which are recorded data).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StackError {
    #[error("stack already allocated: {0}")]
    AlreadyAllocated(Tid),
    #[error("no such thread: {0}")]
    NoSuchThread(Tid),
    #[error("no usage data: {0}")]
    NoUsageData(String),
    #[error("zone fractions must satisfy 0 < low < high < 1")]
    BadZoneConfig,
}

/// Registry failures.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("thread exists: {0}")]
    ThreadExists(Tid),
    #[error("no such thread: {0}")]
    NoSuchThread(Tid),
    #[error("criticality immutable: {0}")]
    CriticalityImmutable(Tid),
    #[error("record truncated: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("invalid {field} byte {value:#04x}")]
    BadField { field: &'static str, value: u8 },
}

/// Scenario-file failures, with line context where available.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ScenarioError {
    pub fn at(line: usize, message: impl Into<String>) -> ScenarioError {
        ScenarioError::Parse { line, message: message.into() }
    }
}
