use thiserror::Error;

use crate::grammar::{Address, Finding};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate tree name `{0}`")]
    DuplicateTree(String),
    #[error("initial tree `{0}` contains a foot node")]
    FootInInitial(String),
    #[error("auxiliary tree `{0}` has multiple feet")]
    MultipleFeet(String),
    #[error("auxiliary tree `{0}` has no foot")]
    MissingFoot(String),
    #[error("tree `{tree}`: foot/root label mismatch (foot {foot}, root {root})")]
    FootLabelMismatch { tree: String, foot: String, root: String },
    #[error("tree `{tree}`: leaf at {addr} is a substitution node, which is not supported")]
    SubstitutionNode { tree: String, addr: Address },
    #[error("tree `{0}`: root must be an interior node")]
    RootNotInterior(String),
    #[error("missing `start` declaration")]
    MissingStart,
    #[error("unknown tree `{0}`")]
    UnknownTree(String),
    #[error("tree `{tree}` has no node at {addr}")]
    UnknownAddress { tree: String, addr: Address },
}

/// Grammar edits that cannot be applied.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EditError {
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("tree `{name}` is {actual}, not {expected}")]
    WrongKind {
        name: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("edit would leave an invalid grammar: {}", join_findings(.0))]
    Invalid(Vec<Finding>),
}

fn join_findings(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    /// A stack walk found an unexpected entry or ran out of entries. This
    /// indicates a table or driver bug rather than a rejected input.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("step budget of {budget} exceeded{}", suspect_note(.suspect))]
    StepBudgetExceeded {
        budget: u64,
        suspect: Option<String>,
    },
}

fn suspect_note(suspect: &Option<String>) -> String {
    match suspect {
        Some(tree) => format!(" (auxiliary tree `{tree}` has no terminal yield)"),
        None => String::new(),
    }
}

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot: {0}")]
    Format(#[from] serde_json::Error),
    #[error("unsupported snapshot format version {0}")]
    Version(u32),
    #[error("snapshot was built for grammar {expected}, current grammar is {actual}")]
    GrammarMismatch { expected: String, actual: String },
    #[error("snapshot is inconsistent: {0}")]
    Inconsistent(String),
}
