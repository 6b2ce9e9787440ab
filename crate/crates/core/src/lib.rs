//! LR parsing for tree adjoining grammars: table construction, a
//! backtracking driver, lazy state expansion and incremental repair after
//! grammar edits.

pub mod dot;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod fsa;
pub mod grammar;
pub mod items;
pub mod lazy;
pub mod oracle;
pub mod snapshot;

pub use dot::export_dot;
pub use engine::{parse, parse_frozen, Event, ParseOptions, ParseOutcome, ParseStats, Verdict};
pub use error::{EditError, EngineError, GrammarError, SnapshotError};
pub use fsa::{build_eager, Fsa, State, StateId, StateStatus};
pub use grammar::{
    parse_grammar_text, parse_tree_decl, validate, AdjConstraint, Address, ElementaryTree, Finding,
    Grammar, Node, Symbol, TreeKind,
};
pub use items::{Action, DotPos, DottedItem, ItemSet, NodeRef, TransLabel};
pub use lazy::{apply_edit, build_lazy, EditReport, GrammarEdit};
pub use oracle::{bf_accepts, derive_strings};
pub use snapshot::Snapshot;
