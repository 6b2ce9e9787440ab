//! Graphviz rendering of an automaton. Kernel-form states are drawn bold,
//! accepting states with a double outline.

use std::fmt::Write;

use crate::fsa::Fsa;
use crate::items::TransLabel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn edge_label(label: &TransLabel) -> String {
    match label {
        TransLabel::Term { terminal } => terminal.to_string(),
        TransLabel::Foot => "foot".to_string(),
        TransLabel::Right { aux, host } => format!("right({aux})@{host}"),
    }
}

/// Renders `fsa` in DOT. Output depends only on the automaton, so it is
/// stable across runs.
pub fn export_dot(fsa: &Fsa) -> String {
    let mut out = String::from("digraph fsa {\n  rankdir=LR;\n  node [shape=box];\n");
    for state in fsa.states() {
        let n = state.items().len();
        let noun = if n == 1 { "item" } else { "items" };
        let mut attrs = vec![format!("label=\"{}\\n{n} {noun}\"", state.id)];
        if !state.is_expanded() {
            attrs.push("style=bold".into());
        }
        if state.accepts() {
            attrs.push("peripheries=2".into());
        }
        writeln!(out, "  s{} [{}];", state.id, attrs.join(", ")).unwrap();
    }
    for state in fsa.states() {
        let Some(exp) = &state.expansion else { continue };
        for (label, target) in &exp.transitions {
            writeln!(out, "  s{} -> s{} [label={}];", state.id, target, quote(&edge_label(label))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}
