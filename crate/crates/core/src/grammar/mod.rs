//! Tree adjoining grammars: elementary trees, Gorn addresses, adjunction
//! constraints and the textual grammar format.

mod parse;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::GrammarError;

pub use self::parse::{parse_grammar_text, parse_tree_decl};
pub use self::validate::{validate, Finding};

/// A node label or terminal text.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Symbol(String);

impl Symbol {
    /// Builds a symbol, rejecting empty text and characters the grammar
    /// format reserves.
    pub fn new(text: impl Into<String>) -> Option<Symbol> {
        let text = text.into();
        let ok = !text.is_empty()
            && !text
                .chars()
                .any(|c| c.is_whitespace() || c == '(' || c == ')' || c == '"');
        ok.then_some(Symbol(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for Symbol {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Gorn address of a node: 1-based child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(Vec<u32>);

impl Address {
    pub fn root() -> Address {
        Address(Vec::new())
    }

    pub fn from_path(path: Vec<u32>) -> Address {
        Address(path)
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: u32) -> Address {
        let mut path = self.0.clone();
        path.push(index);
        Address(path)
    }

    pub fn parent(&self) -> Option<Address> {
        let (_, rest) = self.0.split_last()?;
        Some(Address(rest.to_vec()))
    }

    /// Index of this node among its siblings (1-based); `None` at the root.
    pub fn last_index(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// True when `self` is `other` or one of its ancestors.
    pub fn dominates(&self, other: &Address) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Address {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ε" || s.is_empty() {
            return Ok(Address::root());
        }
        s.split('.')
            .map(|part| match part.parse::<u32>() {
                Ok(0) | Err(_) => Err(format!("invalid address component {part:?} in {s:?}")),
                Ok(n) => Ok(n),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Address)
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which auxiliary trees may adjoin at a node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub enum AdjConstraint {
    /// Every auxiliary tree whose root label matches the node label.
    #[default]
    AnyMatching,
    /// No adjunction (`:na`).
    Null,
    /// Only the named auxiliary trees (`:adj(a,b)`).
    Selective(BTreeSet<String>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Interior {
        label: Symbol,
        constraint: AdjConstraint,
        children: Vec<Node>,
    },
    Terminal(Symbol),
    Epsilon,
    Foot {
        label: Symbol,
        constraint: AdjConstraint,
    },
}

impl Node {
    pub fn label(&self) -> Option<&Symbol> {
        match self {
            Node::Interior { label, .. } | Node::Foot { label, .. } => Some(label),
            Node::Terminal(_) | Node::Epsilon => None,
        }
    }

    pub fn constraint(&self) -> Option<&AdjConstraint> {
        match self {
            Node::Interior { constraint, .. } | Node::Foot { constraint, .. } => Some(constraint),
            Node::Terminal(_) | Node::Epsilon => None,
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Interior { children, .. } => children,
            _ => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeKind {
    Initial,
    Auxiliary,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryTree {
    name: String,
    kind: TreeKind,
    root: Node,
    foot: Option<Address>,
}

impl ElementaryTree {
    /// Assembles a tree, checking the foot invariants.
    pub fn new(name: impl Into<String>, kind: TreeKind, root: Node) -> Result<Self, GrammarError> {
        let name = name.into();
        let mut feet = Vec::new();
        let mut substitution = None;
        collect_leaves(&root, &Address::root(), &mut feet, &mut substitution);
        if !matches!(root, Node::Interior { .. }) {
            return Err(GrammarError::RootNotInterior(name));
        }
        if let Some(addr) = substitution {
            return Err(GrammarError::SubstitutionNode { tree: name, addr });
        }
        let foot = match (kind, feet.len()) {
            (TreeKind::Initial, 0) => None,
            (TreeKind::Initial, _) => return Err(GrammarError::FootInInitial(name)),
            (TreeKind::Auxiliary, 0) => return Err(GrammarError::MissingFoot(name)),
            (TreeKind::Auxiliary, 1) => Some(feet.pop().unwrap()),
            (TreeKind::Auxiliary, _) => return Err(GrammarError::MultipleFeet(name)),
        };
        if let Some(addr) = &foot {
            let foot_label = node_at(&root, addr).and_then(Node::label).cloned();
            let root_label = root.label().cloned();
            if foot_label != root_label {
                return Err(GrammarError::FootLabelMismatch {
                    tree: name,
                    foot: foot_label.map(|s| s.0).unwrap_or_default(),
                    root: root_label.map(|s| s.0).unwrap_or_default(),
                });
            }
        }
        Ok(ElementaryTree { name, kind, root, foot })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    pub fn is_auxiliary(&self) -> bool {
        self.kind == TreeKind::Auxiliary
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn root_label(&self) -> &Symbol {
        self.root.label().expect("root is interior")
    }

    pub fn foot(&self) -> Option<&Address> {
        self.foot.as_ref()
    }

    pub fn node(&self, addr: &Address) -> Option<&Node> {
        node_at(&self.root, addr)
    }

    /// Number of children of the node at `addr` (0 for leaves and unknown addresses).
    pub fn arity(&self, addr: &Address) -> usize {
        self.node(addr).map_or(0, |n| n.children().len())
    }

    /// All addresses in preorder.
    pub fn addresses(&self) -> Vec<Address> {
        let mut out = Vec::new();
        fn walk(node: &Node, addr: Address, out: &mut Vec<Address>) {
            for (i, child) in node.children().iter().enumerate() {
                walk(child, addr.child(i as u32 + 1), out);
            }
            out.push(addr);
        }
        walk(&self.root, Address::root(), &mut out);
        out.sort();
        out
    }

    /// Frontier terminals, left to right.
    pub fn terminals(&self) -> Vec<&Symbol> {
        let mut out = Vec::new();
        fn walk<'a>(node: &'a Node, out: &mut Vec<&'a Symbol>) {
            match node {
                Node::Terminal(t) => out.push(t),
                Node::Interior { children, .. } => children.iter().for_each(|c| walk(c, out)),
                _ => {}
            }
        }
        walk(&self.root, &mut out);
        out
    }
}

fn node_at<'a>(root: &'a Node, addr: &Address) -> Option<&'a Node> {
    let mut node = root;
    for &idx in addr.path() {
        node = node.children().get((idx as usize).checked_sub(1)?)?;
    }
    Some(node)
}

fn collect_leaves(
    node: &Node,
    addr: &Address,
    feet: &mut Vec<Address>,
    substitution: &mut Option<Address>,
) {
    match node {
        Node::Foot { .. } => feet.push(addr.clone()),
        Node::Interior { children, .. } if children.is_empty() => {
            substitution.get_or_insert_with(|| addr.clone());
        }
        Node::Interior { children, .. } => {
            for (i, child) in children.iter().enumerate() {
                collect_leaves(child, &addr.child(i as u32 + 1), feet, substitution);
            }
        }
        Node::Terminal(_) | Node::Epsilon => {}
    }
}

/// A tree adjoining grammar without substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    start: Symbol,
    trees: BTreeMap<String, ElementaryTree>,
    version: u64,
}

impl Grammar {
    pub fn new(start: Symbol) -> Grammar {
        Grammar {
            start,
            trees: BTreeMap::new(),
            version: 0,
        }
    }

    pub fn start(&self) -> &Symbol {
        &self.start
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn tree(&self, name: &str) -> Option<&ElementaryTree> {
        self.trees.get(name)
    }

    pub fn trees(&self) -> impl Iterator<Item = &ElementaryTree> {
        self.trees.values()
    }

    pub fn initial_trees(&self) -> impl Iterator<Item = &ElementaryTree> {
        self.trees.values().filter(|t| t.kind == TreeKind::Initial)
    }

    pub fn auxiliary_trees(&self) -> impl Iterator<Item = &ElementaryTree> {
        self.trees.values().filter(|t| t.kind == TreeKind::Auxiliary)
    }

    /// Initial trees rooted in the start label.
    pub fn start_trees(&self) -> impl Iterator<Item = &ElementaryTree> {
        self.initial_trees().filter(|t| t.root_label() == &self.start)
    }

    /// Inserts a tree during construction; the version is not bumped.
    pub(crate) fn insert(&mut self, tree: ElementaryTree) -> Result<(), GrammarError> {
        if self.trees.contains_key(&tree.name) {
            return Err(GrammarError::DuplicateTree(tree.name));
        }
        self.trees.insert(tree.name.clone(), tree);
        Ok(())
    }

    /// Returns a new grammar version with `tree` added.
    pub fn with_tree(&self, tree: ElementaryTree) -> Result<Grammar, GrammarError> {
        let mut next = self.clone();
        next.insert(tree)?;
        next.version += 1;
        Ok(next)
    }

    /// Returns a new grammar version with the named tree removed.
    pub fn without_tree(&self, name: &str) -> Result<Grammar, GrammarError> {
        let mut next = self.clone();
        if next.trees.remove(name).is_none() {
            return Err(GrammarError::UnknownTree(name.to_string()));
        }
        next.version += 1;
        Ok(next)
    }

    /// Terminal alphabet, sorted.
    pub fn terminals(&self) -> BTreeSet<Symbol> {
        self.trees
            .values()
            .flat_map(|t| t.terminals())
            .cloned()
            .collect()
    }

    /// Auxiliary trees that may adjoin at `addr` of `tree`.
    pub fn adjoiners(&self, tree: &str, addr: &Address) -> Result<BTreeSet<String>, GrammarError> {
        let t = self
            .tree(tree)
            .ok_or_else(|| GrammarError::UnknownTree(tree.to_string()))?;
        let node = t.node(addr).ok_or_else(|| GrammarError::UnknownAddress {
            tree: tree.to_string(),
            addr: addr.clone(),
        })?;
        Ok(self.node_adjoiners(node).map(|a| a.name.clone()).collect())
    }

    /// Adjoinability at an already-resolved node. Feet, terminal and
    /// epsilon leaves admit nothing.
    pub(crate) fn node_adjoiners<'a>(
        &'a self,
        node: &'a Node,
    ) -> impl Iterator<Item = &'a ElementaryTree> + 'a {
        let label = node.label();
        let constraint = node.constraint();
        let foot = matches!(node, Node::Foot { .. });
        self.auxiliary_trees().filter(move |aux| {
            let Some(label) = label.filter(|_| !foot) else { return false };
            if aux.root_label() != label {
                return false;
            }
            match constraint {
                Some(AdjConstraint::AnyMatching) => true,
                Some(AdjConstraint::Selective(names)) => names.contains(&aux.name),
                Some(AdjConstraint::Null) | None => false,
            }
        })
    }

    /// Fast membership test for `aux ∈ adjoiners(tree, addr)`.
    pub(crate) fn can_adjoin(&self, aux: &str, tree: &str, addr: &Address) -> bool {
        let (Some(aux), Some(node)) = (self.tree(aux), self.tree(tree).and_then(|t| t.node(addr)))
        else {
            return false;
        };
        if !aux.is_auxiliary() || matches!(node, Node::Foot { .. }) || node.label() != Some(aux.root_label()) {
            return false;
        }
        match node.constraint() {
            Some(AdjConstraint::AnyMatching) => true,
            Some(AdjConstraint::Selective(names)) => names.contains(&aux.name),
            _ => false,
        }
    }

    /// Every (tree, address) where `aux` may adjoin.
    pub fn adjunction_sites(&self, aux: &str) -> Vec<(String, Address)> {
        let mut out = Vec::new();
        for tree in self.trees.values() {
            for addr in tree.addresses() {
                if self.can_adjoin(aux, &tree.name, &addr) {
                    out.push((tree.name.clone(), addr));
                }
            }
        }
        out
    }

    /// SHA-256 of the canonical printed form, hex encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for AdjConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdjConstraint::AnyMatching => Ok(()),
            AdjConstraint::Null => f.write_str(":na"),
            AdjConstraint::Selective(names) => {
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                write!(f, ":adj({})", names.join(","))
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Interior {
                label,
                constraint,
                children,
            } => {
                write!(f, "({label}{constraint}")?;
                for child in children {
                    write!(f, " {child}")?;
                }
                f.write_str(")")
            }
            Node::Terminal(t) => write!(f, "\"{t}\""),
            Node::Epsilon => f.write_str("()"),
            Node::Foot { label, constraint } => write!(f, "({label}*{constraint})"),
        }
    }
}

impl fmt::Display for ElementaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            TreeKind::Initial => "initial",
            TreeKind::Auxiliary => "aux",
        };
        write!(f, "{kind} {} : {}", self.name, self.root)
    }
}

/// Canonical printer; output reparses to an equal grammar.
impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start {}", self.start)?;
        for tree in self.trees.values() {
            writeln!(f, "{tree}")?;
        }
        Ok(())
    }
}
