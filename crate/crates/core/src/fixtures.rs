//! Reference grammars used throughout the tests, benches and docs.
//!
//! `G1` generates `{ aⁿ e cⁿ }`; adding `gamma` gives `{ aⁿ bᵐ e cⁿ dᵐ }`.

use crate::grammar::{parse_grammar_text, parse_tree_decl, ElementaryTree, Grammar};

pub const G1_TEXT: &str = r#"start S
initial alpha : (S "e")
aux beta : (S:na "a" (S (S*:na) "c"))
"#;

pub const GAMMA_DECL: &str = r#"aux gamma : (S:na "b" (S:adj(gamma) (S*:na) "d"))"#;

pub const G2_TEXT: &str = r#"start S
initial alpha : (S "e")
aux beta : (S:na "a" (S (S*:na) "c"))
aux gamma : (S:na "b" (S:adj(gamma) (S*:na) "d"))
"#;

/// `G1` plus an exact copy of `beta` under another name.
pub const G_CONFLICT_TEXT: &str = r#"start S
initial alpha : (S "e")
aux beta : (S:na "a" (S (S*:na) "c"))
aux beta2 : (S:na "a" (S (S*:na) "c"))
"#;

pub const SINGLE_TEXT: &str = "start S\ninitial alpha : (S \"e\")\n";

pub fn g1() -> Grammar {
    parse_grammar_text(G1_TEXT).expect("G1 parses")
}

pub fn g2() -> Grammar {
    parse_grammar_text(G2_TEXT).expect("G2 parses")
}

pub fn g_conflict() -> Grammar {
    parse_grammar_text(G_CONFLICT_TEXT).expect("G_CONFLICT parses")
}

pub fn single() -> Grammar {
    parse_grammar_text(SINGLE_TEXT).expect("single-tree grammar parses")
}

pub fn gamma() -> ElementaryTree {
    parse_tree_decl(GAMMA_DECL).expect("gamma parses")
}
