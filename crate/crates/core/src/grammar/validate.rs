use std::fmt;

use super::{AdjConstraint, Address, Grammar};

/// A problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Finding {
    NoStartTree { start: String },
    UnresolvedSelective { tree: String, addr: Address, name: String },
    SelectiveNotAuxiliary { tree: String, addr: Address, name: String },
    SelectiveLabelMismatch { tree: String, addr: Address, name: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::NoStartTree { start } => {
                write!(f, "no start-compatible initial tree (start label {start})")
            }
            Finding::UnresolvedSelective { tree, addr, name } => {
                write!(f, "unresolved selective constraint `{name}` at {tree}@{addr}")
            }
            Finding::SelectiveNotAuxiliary { tree, addr, name } => {
                write!(f, "selective constraint at {tree}@{addr} names initial tree `{name}`")
            }
            Finding::SelectiveLabelMismatch { tree, addr, name } => write!(
                f,
                "selective constraint at {tree}@{addr} names `{name}` whose root label differs"
            ),
        }
    }
}

/// Checks the grammar-level invariants; an empty report means the grammar
/// can be compiled.
pub fn validate(g: &Grammar) -> Vec<Finding> {
    let mut findings = Vec::new();
    if g.start_trees().next().is_none() {
        findings.push(Finding::NoStartTree {
            start: g.start().to_string(),
        });
    }
    for tree in g.trees() {
        for addr in tree.addresses() {
            let node = tree.node(&addr).expect("address enumerated from tree");
            let Some(AdjConstraint::Selective(names)) = node.constraint() else {
                continue;
            };
            for name in names {
                let finding = match g.tree(name) {
                    None => Finding::UnresolvedSelective {
                        tree: tree.name().into(),
                        addr: addr.clone(),
                        name: name.clone(),
                    },
                    Some(t) if !t.is_auxiliary() => Finding::SelectiveNotAuxiliary {
                        tree: tree.name().into(),
                        addr: addr.clone(),
                        name: name.clone(),
                    },
                    Some(t) if Some(t.root_label()) != node.label() => {
                        Finding::SelectiveLabelMismatch {
                            tree: tree.name().into(),
                            addr: addr.clone(),
                            name: name.clone(),
                        }
                    }
                    Some(_) => continue,
                };
                findings.push(finding);
            }
        }
    }
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grammar::parse_grammar_text;

    #[test]
    fn fixtures_are_clean() {
        assert!(validate(&fixtures::g1()).is_empty());
        assert!(validate(&fixtures::g2()).is_empty());
        assert!(validate(&fixtures::g_conflict()).is_empty());
    }

    #[test]
    fn dangling_selective() {
        let text = format!("{}aux beta2 : (S:na \"a\" (S:adj(gamma) (S*:na) \"c\"))\n", fixtures::G1_TEXT);
        let g = parse_grammar_text(&text).unwrap();
        let findings = validate(&g);
        assert_eq!(findings.len(), 1);
        assert!(findings[0].to_string().contains("unresolved selective constraint"));
    }

    #[test]
    fn no_start_tree() {
        let g = parse_grammar_text("start S\ninitial a : (T \"e\")").unwrap();
        let findings = validate(&g);
        assert!(findings[0].to_string().contains("no start-compatible initial tree"));
    }

    #[test]
    fn selective_kind_and_label() {
        let g = parse_grammar_text(
            "start S\ninitial a : (S:adj(a,t) \"e\")\naux t : (T \"x\" (T*))",
        )
        .unwrap();
        let findings = validate(&g);
        assert_eq!(findings.len(), 2);
        assert!(matches!(findings[0], Finding::SelectiveNotAuxiliary { .. }));
        assert!(matches!(findings[1], Finding::SelectiveLabelMismatch { .. }));
    }
}
