//! Brute-force recognizer, independent of the LR machinery.
//!
//! Yields are computed bottom-up as a least fixpoint over length-bounded sets:
//! an auxiliary tree yields pairs (left of foot, right of foot), every other
//! node yields plain strings. Because every set is bounded by length the
//! fixpoint is finite even for auxiliary trees without terminals.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::grammar::{Address, ElementaryTree, Grammar, Node, Symbol};

pub type Tokens = Vec<Symbol>;

/// Yield of a subtree: plain, or split around an auxiliary tree's foot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Yield {
    Flat(Tokens),
    Split(Tokens, Tokens),
}

impl Yield {
    fn len(&self) -> usize {
        match self {
            Yield::Flat(s) => s.len(),
            Yield::Split(l, r) => l.len() + r.len(),
        }
    }

    fn concat(&self, other: &Yield) -> Option<Yield> {
        Some(match (self, other) {
            (Yield::Flat(a), Yield::Flat(b)) => Yield::Flat(cat(a, b)),
            (Yield::Flat(a), Yield::Split(l, r)) => Yield::Split(cat(a, l), r.clone()),
            (Yield::Split(l, r), Yield::Flat(b)) => Yield::Split(l.clone(), cat(r, b)),
            (Yield::Split(..), Yield::Split(..)) => return None,
        })
    }

    /// Wraps `inner` with an auxiliary yield `(l, r)`.
    fn wrap(l: &Tokens, r: &Tokens, inner: &Yield) -> Yield {
        match inner {
            Yield::Flat(s) => Yield::Flat(cat(&cat(l, s), r)),
            Yield::Split(a, b) => Yield::Split(cat(l, a), cat(b, r)),
        }
    }
}

fn cat(a: &[Symbol], b: &[Symbol]) -> Tokens {
    a.iter().chain(b).cloned().collect()
}

/// Restricts which yields are kept.
trait Bound {
    fn keep(&self, y: &Yield) -> bool;
}

struct MaxLen(usize);

impl Bound for MaxLen {
    fn keep(&self, y: &Yield) -> bool {
        y.len() <= self.0
    }
}

/// Every piece of a yield must occur contiguously in the input.
struct Substrings<'a>(&'a [Symbol]);

impl Bound for Substrings<'_> {
    fn keep(&self, y: &Yield) -> bool {
        let is_sub = |s: &[Symbol]| s.is_empty() || self.0.windows(s.len()).any(|w| w == s);
        match y {
            Yield::Flat(s) => is_sub(s),
            Yield::Split(l, r) => l.len() + r.len() <= self.0.len() && is_sub(l) && is_sub(r),
        }
    }
}

type AuxYields = HashMap<String, BTreeSet<(Tokens, Tokens)>>;

fn node_yields<B: Bound>(
    g: &Grammar,
    tree: &ElementaryTree,
    addr: &Address,
    aux: &AuxYields,
    bound: &B,
) -> BTreeSet<Yield> {
    let node = tree.node(addr).expect("address from the tree itself");
    let content: BTreeSet<Yield> = match node {
        Node::Terminal(t) => [Yield::Flat(vec![t.clone()])].into(),
        Node::Epsilon => [Yield::Flat(Vec::new())].into(),
        Node::Foot { .. } => [Yield::Split(Vec::new(), Vec::new())].into(),
        Node::Interior { children, .. } => {
            let mut acc: BTreeSet<Yield> = [Yield::Flat(Vec::new())].into();
            for i in 1..=children.len() as u32 {
                let child = node_yields(g, tree, &addr.child(i), aux, bound);
                let mut next = BTreeSet::new();
                for a in &acc {
                    for c in &child {
                        if let Some(y) = a.concat(c).filter(|y| bound.keep(y)) {
                            next.insert(y);
                        }
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    };
    let mut out = content.clone();
    for adjoiner in g.node_adjoiners(node) {
        for (l, r) in aux.get(adjoiner.name()).into_iter().flatten() {
            for c in &content {
                let y = Yield::wrap(l, r, c);
                if bound.keep(&y) {
                    out.insert(y);
                }
            }
        }
    }
    out
}

fn aux_fixpoint<B: Bound>(g: &Grammar, bound: &B) -> AuxYields {
    let mut aux: AuxYields = g
        .auxiliary_trees()
        .map(|t| (t.name().to_string(), BTreeSet::new()))
        .collect();
    loop {
        let mut changed = false;
        for tree in g.auxiliary_trees() {
            let ys = node_yields(g, tree, &Address::root(), &aux, bound);
            let pairs: BTreeSet<(Tokens, Tokens)> = ys
                .into_iter()
                .filter_map(|y| match y {
                    Yield::Split(l, r) => Some((l, r)),
                    Yield::Flat(_) => None,
                })
                .collect();
            let slot = aux.get_mut(tree.name()).expect("seeded above");
            if pairs.len() != slot.len() {
                *slot = pairs;
                changed = true;
            }
        }
        if !changed {
            return aux;
        }
    }
}

fn language<B: Bound>(g: &Grammar, bound: &B) -> BTreeSet<Tokens> {
    let aux = aux_fixpoint(g, bound);
    g.start_trees()
        .flat_map(|t| node_yields(g, t, &Address::root(), &aux, bound))
        .filter_map(|y| match y {
            Yield::Flat(s) => Some(s),
            Yield::Split(..) => None,
        })
        .collect()
}

/// Every string of at most `max_len` tokens derivable from a start-label
/// initial tree.
pub fn derive_strings(g: &Grammar, max_len: usize) -> BTreeSet<Tokens> {
    language(g, &MaxLen(max_len))
}

/// Membership of `tokens` in the language of `g`.
pub fn bf_accepts<S: AsRef<str>>(g: &Grammar, tokens: &[S]) -> bool {
    let Some(input) = tokens
        .iter()
        .map(|t| Symbol::new(t.as_ref()))
        .collect::<Option<Tokens>>()
    else {
        return false;
    };
    language(g, &Substrings(&input)).contains(&input)
}

/// Renders a token string the way the CLI prints it.
pub fn render(tokens: &[Symbol]) -> String {
    let words: Vec<&str> = tokens.iter().map(Symbol::as_str).collect();
    words.join(" ")
}

/// Every nonempty token string over `alphabet` of length at most `max_len`,
/// shortest first.
pub fn all_strings(alphabet: &[Symbol], max_len: usize) -> Vec<Tokens> {
    let mut out = Vec::new();
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for s in &layer {
            for a in alphabet {
                let mut t: Tokens = s.clone();
                t.push(a.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// An elementary tree together with the derivations adjoined into it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DerivationNode {
    pub tree: String,
    pub adjunctions: BTreeMap<Address, DerivationNode>,
}

impl DerivationNode {
    pub fn leaf(tree: impl Into<String>) -> Self {
        DerivationNode {
            tree: tree.into(),
            adjunctions: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.adjunctions.values().map(DerivationNode::size).sum::<usize>()
    }

    /// Checks adjunction constraints throughout, then computes the yield of
    /// the derived tree.
    pub fn derived_yield(&self, g: &Grammar) -> Option<Yield> {
        let tree = g.tree(&self.tree)?;
        for (addr, sub) in &self.adjunctions {
            let node = tree.node(addr)?;
            if !g.node_adjoiners(node).any(|a| a.name() == sub.tree) {
                return None;
            }
        }
        self.yield_at(g, tree, &Address::root())
    }

    fn yield_at(&self, g: &Grammar, tree: &ElementaryTree, addr: &Address) -> Option<Yield> {
        let content = match tree.node(addr)? {
            Node::Terminal(t) => Yield::Flat(vec![t.clone()]),
            Node::Epsilon => Yield::Flat(Vec::new()),
            Node::Foot { .. } => Yield::Split(Vec::new(), Vec::new()),
            Node::Interior { children, .. } => {
                let mut acc = Yield::Flat(Vec::new());
                for i in 1..=children.len() as u32 {
                    acc = acc.concat(&self.yield_at(g, tree, &addr.child(i))?)?;
                }
                acc
            }
        };
        match self.adjunctions.get(addr) {
            None => Some(content),
            Some(sub) => match sub.derived_yield(g)? {
                Yield::Split(l, r) => Some(Yield::wrap(&l, &r, &content)),
                Yield::Flat(_) => None,
            },
        }
    }
}

/// Result of explicit derivation enumeration.
#[derive(Clone, Debug, Default)]
pub struct Enumeration {
    pub strings: BTreeSet<Tokens>,
    pub derivations: usize,
    /// Set when some auxiliary tree has no terminals and the nesting depth
    /// cap may have cut derivations short.
    pub incomplete: bool,
}

/// Enumerates derivation trees explicitly. Nesting depth is bounded by
/// `max_len` when every auxiliary tree yields a terminal, else by
/// `2 * max_len` and the result is flagged incomplete.
pub fn enumerate_derivations(g: &Grammar, max_len: usize) -> Enumeration {
    let incomplete = g.auxiliary_trees().any(|t| t.terminals().is_empty());
    let depth = if incomplete { 2 * max_len } else { max_len };
    let mut memo = HashMap::new();
    let mut out = Enumeration {
        incomplete,
        ..Enumeration::default()
    };
    for tree in g.start_trees() {
        for d in derivations(g, tree, depth, max_len, &mut memo) {
            if let Some(Yield::Flat(s)) = d.derived_yield(g) {
                out.derivations += 1;
                if s.len() <= max_len {
                    out.strings.insert(s);
                }
            }
        }
    }
    out
}

fn terminal_count(g: &Grammar, d: &DerivationNode) -> usize {
    g.tree(&d.tree).map_or(0, |t| t.terminals().len())
        + d.adjunctions.values().map(|s| terminal_count(g, s)).sum::<usize>()
}

fn derivations(
    g: &Grammar,
    tree: &ElementaryTree,
    depth: usize,
    max_len: usize,
    memo: &mut HashMap<(String, usize), Vec<DerivationNode>>,
) -> Vec<DerivationNode> {
    let key = (tree.name().to_string(), depth);
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let mut partial = vec![DerivationNode::leaf(tree.name())];
    if depth > 0 {
        for addr in tree.addresses() {
            let node = tree.node(&addr).expect("own address");
            let adjoiners: Vec<&ElementaryTree> = g.node_adjoiners(node).collect();
            if adjoiners.is_empty() {
                continue;
            }
            let mut options = Vec::new();
            for aux in adjoiners {
                options.extend(derivations(g, aux, depth - 1, max_len, memo));
            }
            let mut next = Vec::new();
            for d in &partial {
                next.push(d.clone());
                for sub in &options {
                    let mut e = d.clone();
                    e.adjunctions.insert(addr.clone(), sub.clone());
                    if terminal_count(g, &e) <= max_len {
                        next.push(e);
                    }
                }
            }
            partial = next;
        }
    }
    memo.insert(key, partial.clone());
    partial
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grammar::parse_grammar_text;

    fn strings(set: &BTreeSet<Tokens>) -> BTreeSet<String> {
        set.iter().map(|s| render(s)).collect()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn g1_up_to_five() {
        let got = strings(&derive_strings(&fixtures::g1(), 5));
        assert_eq!(got, set(&["e", "a e c", "a a e c c"]));
    }

    #[test]
    fn g2_up_to_five() {
        let got = strings(&derive_strings(&fixtures::g2(), 5));
        assert_eq!(
            got,
            set(&["e", "a e c", "b e d", "a b e c d", "a a e c c", "b b e d d"])
        );
    }

    #[test]
    fn no_auxiliaries() {
        assert_eq!(strings(&derive_strings(&fixtures::single(), 3)), set(&["e"]));
    }

    #[test]
    fn membership() {
        let g1 = fixtures::g1();
        assert!(bf_accepts(&g1, &toks("a e c")));
        assert!(!bf_accepts(&g1, &toks("a e")));
        assert!(!bf_accepts(&g1, &toks("a x c")));
        let g2 = fixtures::g2();
        assert!(bf_accepts(&g2, &toks("a a b e c c d")));
        assert!(!bf_accepts(&g2, &toks("a b e d c")));
    }

    #[test]
    fn enumerator_agrees_with_fixpoint() {
        for g in [fixtures::g1(), fixtures::g2(), fixtures::g_conflict()] {
            for n in 0..=7 {
                let e = enumerate_derivations(&g, n);
                assert!(!e.incomplete);
                assert_eq!(e.strings, derive_strings(&g, n), "n = {n}");
            }
        }
    }

    #[test]
    fn terminal_less_auxiliary() {
        // eta adds nothing, so the language is unchanged but derivations are
        // unbounded.
        let g = parse_grammar_text(
            "start S\ninitial alpha : (S \"e\")\naux eta : (S:na (S*:na))\naux beta : (S:na \"a\" (S (S*:na) \"c\"))\n",
        )
        .unwrap();
        assert_eq!(derive_strings(&g, 5), derive_strings(&fixtures::g1(), 5));
        let e = enumerate_derivations(&g, 3);
        assert!(e.incomplete);
        assert_eq!(e.strings, derive_strings(&g, 3));
    }

    #[test]
    fn derivation_yield_checks_constraints() {
        let g = fixtures::g1();
        let mut d = DerivationNode::leaf("alpha");
        d.adjunctions.insert(Address::root(), DerivationNode::leaf("beta"));
        assert_eq!(d.derived_yield(&g), Some(Yield::Flat(toks("a e c").iter().map(|t| Symbol::new(*t).unwrap()).collect())));
        // beta's root is null-adjunction.
        let mut bad = DerivationNode::leaf("beta");
        bad.adjunctions.insert(Address::root(), DerivationNode::leaf("beta"));
        assert_eq!(bad.derived_yield(&g), None);
        assert_eq!(d.size(), 2);
    }

    #[test]
    fn all_strings_counts() {
        let abc: Vec<Symbol> = ["a", "e", "c"].iter().map(|t| Symbol::new(*t).unwrap()).collect();
        assert_eq!(all_strings(&abc, 7).len(), 3279);
    }

    proptest::proptest! {
        #[test]
        fn monotone_in_bound(n in 0usize..7) {
            let g = fixtures::g2();
            let small = derive_strings(&g, n);
            let big = derive_strings(&g, n + 1);
            proptest::prop_assert!(small.is_subset(&big));
        }
    }
}
