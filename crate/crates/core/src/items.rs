//! Dotted trees and the closure, transition and action functions that
//! define LR(0) states over a tree adjoining grammar.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GrammarError;
use crate::grammar::{Address, ElementaryTree, Grammar, Node, Symbol};

/// The four dot positions around a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DotPos {
    /// Left, above the node.
    LA,
    /// Left, below the node.
    LB,
    /// Right, below the node.
    RB,
    /// Right, above the node.
    RA,
}

impl fmt::Display for DotPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DotPos::LA => "LA",
            DotPos::LB => "LB",
            DotPos::RB => "RB",
            DotPos::RA => "RA",
        };
        f.write_str(s)
    }
}

/// A node of a named elementary tree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeRef {
    pub tree: String,
    pub addr: Address,
}

impl NodeRef {
    pub fn new(tree: impl Into<String>, addr: Address) -> NodeRef {
        NodeRef { tree: tree.into(), addr }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.tree, self.addr)
    }
}

/// A dotted tree. `stars` holds the nodes where an adjunction has been
/// completed or is in progress.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DottedItem {
    pub tree: String,
    pub addr: Address,
    pub pos: DotPos,
    pub stars: BTreeSet<Address>,
}

impl DottedItem {
    pub fn new(tree: impl Into<String>, addr: Address, pos: DotPos) -> DottedItem {
        DottedItem {
            tree: tree.into(),
            addr,
            pos,
            stars: BTreeSet::new(),
        }
    }

    pub fn with_stars(mut self, stars: impl IntoIterator<Item = Address>) -> DottedItem {
        self.stars = stars.into_iter().collect();
        self
    }

    fn moved(&self, addr: Address, pos: DotPos) -> DottedItem {
        DottedItem {
            tree: self.tree.clone(),
            addr,
            pos,
            stars: self.stars.clone(),
        }
    }

    pub fn is_starred(&self) -> bool {
        self.stars.contains(&self.addr)
    }
}

impl fmt::Display for DottedItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}", self.tree, self.addr, self.pos)?;
        if !self.stars.is_empty() {
            let stars: Vec<String> = self.stars.iter().map(ToString::to_string).collect();
            write!(f, ",{{{}}}", stars.join(","))?;
        }
        f.write_str(">")
    }
}

pub type ItemSet = BTreeSet<DottedItem>;

/// Transition labels. `Right` is keyed by the host node as well as the
/// adjoined tree so that completing an adjunction only advances the node
/// whose subtree was wrapped.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TransLabel {
    Term { terminal: Symbol },
    Foot,
    Right { aux: String, host: NodeRef },
}

impl TransLabel {
    pub fn term(t: &str) -> TransLabel {
        TransLabel::Term {
            terminal: Symbol::new(t).expect("valid terminal"),
        }
    }

    pub fn right(aux: &str, host_tree: &str, host_addr: Address) -> TransLabel {
        TransLabel::Right {
            aux: aux.to_string(),
            host: NodeRef::new(host_tree, host_addr),
        }
    }
}

impl fmt::Display for TransLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransLabel::Term { terminal } => write!(f, "{terminal}"),
            TransLabel::Foot => f.write_str("foot"),
            TransLabel::Right { aux, host } => write!(f, "right({aux})@{host}"),
        }
    }
}

/// Parse-table actions. Variant order is the order in which the driver
/// tries them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    Shift { terminal: Symbol },
    ResumeRight { item: DottedItem },
    ReduceRoot { item: DottedItem },
    Accept { item: DottedItem },
}

impl Action {
    pub fn is_shift(&self) -> bool {
        matches!(self, Action::Shift { .. })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift { terminal } => write!(f, "shift {terminal}"),
            Action::ResumeRight { item } => write!(f, "resume-right {item}"),
            Action::ReduceRoot { item } => write!(f, "reduce-root {item}"),
            Action::Accept { item } => write!(f, "accept {item}"),
        }
    }
}

/// Result of moving the dot one step along the left-to-right traversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Advance {
    Next(Address, DotPos),
    AtEnd,
    /// LA and RB moves (and LB at a leaf) depend on adjunction and are
    /// decided by the closure.
    ClosureControlled,
}

pub fn advance_dot(tree: &ElementaryTree, addr: &Address, pos: DotPos) -> Result<Advance, GrammarError> {
    let node = tree.node(addr).ok_or_else(|| GrammarError::UnknownAddress {
        tree: tree.name().to_string(),
        addr: addr.clone(),
    })?;
    Ok(match pos {
        DotPos::LB if !node.children().is_empty() => Advance::Next(addr.child(1), DotPos::LA),
        DotPos::RA => match addr.parent() {
            None => Advance::AtEnd,
            Some(parent) => {
                let idx = addr.last_index().expect("non-root address");
                if (idx as usize) < tree.arity(&parent) {
                    Advance::Next(parent.child(idx + 1), DotPos::LA)
                } else {
                    Advance::Next(parent, DotPos::RB)
                }
            }
        },
        _ => Advance::ClosureControlled,
    })
}

/// Closes `kernel` under adjunction prediction, left completion and the
/// dot-movement rules.
pub fn close(kernel: &ItemSet, g: &Grammar) -> ItemSet {
    let mut closed = kernel.clone();
    let mut work: Vec<DottedItem> = kernel.iter().cloned().collect();
    let mut sites: HashMap<String, Vec<(String, Address)>> = HashMap::new();

    let push = |item: DottedItem, closed: &mut ItemSet, work: &mut Vec<DottedItem>| {
        if !closed.contains(&item) {
            closed.insert(item.clone());
            work.push(item);
        }
    };

    while let Some(item) = work.pop() {
        let Some(tree) = g.tree(&item.tree) else { continue };
        let Some(node) = tree.node(&item.addr) else { continue };
        match item.pos {
            DotPos::LA => match node {
                Node::Terminal(_) => {}
                Node::Epsilon => push(item.moved(item.addr.clone(), DotPos::RA), &mut closed, &mut work),
                Node::Interior { .. } | Node::Foot { .. } => {
                    for aux in g.node_adjoiners(node) {
                        push(
                            DottedItem::new(aux.name(), Address::root(), DotPos::LA),
                            &mut closed,
                            &mut work,
                        );
                    }
                    push(item.moved(item.addr.clone(), DotPos::LB), &mut closed, &mut work);
                }
            },
            DotPos::LB => match node {
                Node::Interior { .. } => {
                    push(item.moved(item.addr.child(1), DotPos::LA), &mut closed, &mut work);
                }
                Node::Foot { .. } => {
                    let hosts = sites
                        .entry(item.tree.clone())
                        .or_insert_with(|| g.adjunction_sites(&item.tree));
                    for (host_tree, host_addr) in hosts.iter() {
                        let host = DottedItem::new(host_tree.clone(), host_addr.clone(), DotPos::LB)
                            .with_stars([host_addr.clone()]);
                        push(host, &mut closed, &mut work);
                    }
                }
                Node::Terminal(_) | Node::Epsilon => {}
            },
            DotPos::RB => {
                if !item.is_starred() {
                    push(item.moved(item.addr.clone(), DotPos::RA), &mut closed, &mut work);
                }
            }
            DotPos::RA => {
                if let Ok(Advance::Next(addr, pos)) = advance_dot(tree, &item.addr, item.pos) {
                    push(item.moved(addr, pos), &mut closed, &mut work);
                }
            }
        }
    }
    closed
}

/// Kernel of every state reachable in one transition from a closed item set.
pub fn successors(closed: &ItemSet, g: &Grammar) -> BTreeMap<TransLabel, ItemSet> {
    let mut out: BTreeMap<TransLabel, ItemSet> = BTreeMap::new();
    for item in closed {
        let Some(tree) = g.tree(&item.tree) else { continue };
        let Some(node) = tree.node(&item.addr) else { continue };
        match (item.pos, node) {
            (DotPos::LA, Node::Terminal(t)) => {
                out.entry(TransLabel::Term { terminal: t.clone() })
                    .or_default()
                    .insert(item.moved(item.addr.clone(), DotPos::RA));
            }
            (DotPos::LA, Node::Interior { .. } | Node::Foot { .. }) => {
                for aux in g.node_adjoiners(node) {
                    let mut next = item.moved(item.addr.clone(), DotPos::RA);
                    next.stars.insert(item.addr.clone());
                    out.entry(TransLabel::right(aux.name(), &item.tree, item.addr.clone()))
                        .or_default()
                        .insert(next);
                }
            }
            (DotPos::LB, Node::Foot { .. }) => {
                out.entry(TransLabel::Foot)
                    .or_default()
                    .insert(item.moved(item.addr.clone(), DotPos::RB));
            }
            _ => {}
        }
    }
    out
}

/// Parse-table actions of a closed state.
pub fn actions(closed: &ItemSet, g: &Grammar) -> BTreeSet<Action> {
    let mut out = BTreeSet::new();
    for item in closed {
        let Some(tree) = g.tree(&item.tree) else { continue };
        let Some(node) = tree.node(&item.addr) else { continue };
        match (item.pos, node) {
            (DotPos::LA, Node::Terminal(t)) => {
                out.insert(Action::Shift { terminal: t.clone() });
            }
            (DotPos::RB, _) if item.is_starred() => {
                out.insert(Action::ResumeRight { item: item.clone() });
            }
            (DotPos::RA, _) if item.addr.is_root() => {
                if tree.is_auxiliary() {
                    out.insert(Action::ReduceRoot { item: item.clone() });
                } else {
                    out.insert(Action::Accept { item: item.clone() });
                }
            }
            _ => {}
        }
    }
    out
}

/// True when the action set leaves the driver a choice: more than one
/// non-shift action, or a non-shift action next to shifts.
pub fn is_conflicted(actions: &BTreeSet<Action>) -> bool {
    let non_shift = actions.iter().filter(|a| !a.is_shift()).count();
    let shifts = actions.len() - non_shift;
    non_shift > 1 || (non_shift >= 1 && shifts >= 1)
}
