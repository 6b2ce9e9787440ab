//! The LR driver.
//!
//! The sequence of stacks of a bottom-up embedded pushdown automaton is kept
//! as one flat stack. A resume-right pushes a foot mark that records how many
//! raw entries below it belong to the material under the foot, so reducing an
//! auxiliary tree (the unwrap) can pop its left part, the embedded material
//! and its right part in one walk. Table conflicts are explored depth-first.
//!
//! States merge prediction contexts, so a resume-right can be taken for an
//! adjunction whose left part was never read; only the later reduce checks
//! it. Resumes are therefore cut off once the pending adjunctions could not
//! all fit in the input. Grammars with terminal-less auxiliary trees get no
//! such bound and rely on the step budget.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::EngineError;
use crate::fsa::{Fsa, State, StateId};
use crate::grammar::{Address, ElementaryTree, Grammar, Node, Symbol};
use crate::items::{Action, DottedItem, NodeRef, TransLabel};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

/// Where an auxiliary tree's foot was attached: the host node it was
/// adjoined at, and, when that host node dominates its own tree's foot,
/// the same information for the host tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FootInfo {
    pub host: NodeRef,
    pub inner: Option<Box<FootInfo>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum EntryLabel {
    Term(Symbol),
    /// Pushed by resume-right; `k` raw entries below belong to the host.
    FootMark { k: usize, foot: FootInfo },
    /// Pushed after a reduce-root; stands for the whole adjunction.
    RightMark { aux: String, foot: Option<FootInfo> },
}

impl fmt::Display for EntryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryLabel::Term(t) => write!(f, "{t}"),
            EntryLabel::FootMark { k, .. } => write!(f, "foot(k={k})"),
            EntryLabel::RightMark { aux, .. } => write!(f, "right({aux})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StackEntry {
    pub state: StateId,
    pub label: EntryLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Shift(Symbol),
    Resume { k: usize },
    Reduce(String),
    Accept,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Shift(t) => write!(f, "shift {t}"),
            Event::Resume { k } => write!(f, "resume k={k}"),
            Event::Reduce(tree) => write!(f, "reduce {tree}"),
            Event::Accept => f.write_str("accept"),
        }
    }
}

/// A parser configuration. The bottom state (0) is implicit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Config {
    pub entries: Vec<StackEntry>,
    pub cursor: usize,
    pub accepted: bool,
    /// Events on the path from the initial configuration.
    pub path: Vec<Event>,
}

impl Config {
    pub fn top_state(&self) -> StateId {
        state_below(&self.entries, self.entries.len())
    }
}

/// State exposed when only the first `len` entries remain.
fn state_below(entries: &[StackEntry], len: usize) -> StateId {
    match len {
        0 => StateId::START,
        n => entries[n - 1].state,
    }
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub trace: bool,
    pub step_budget: u64,
}

impl ParseOptions {
    /// Default options, with the step budget taken from `TAGLR_STEP_BUDGET`
    /// when it is set to a number.
    pub fn from_env() -> Self {
        let step_budget = std::env::var("TAGLR_STEP_BUDGET")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_STEP_BUDGET);
        ParseOptions {
            trace: false,
            step_budget,
        }
    }
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            trace: false,
            step_budget: DEFAULT_STEP_BUDGET,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub steps: u64,
    pub expansions: u64,
    pub backtracks: u64,
    pub max_depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseOutcome {
    pub verdict: Verdict,
    pub stats: ParseStats,
    pub trace: Option<Vec<String>>,
    /// Events of the accepting branch; empty on rejection.
    pub path: Vec<Event>,
    pub diagnostic: Option<String>,
}

impl ParseOutcome {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Source of expanded states for the driver.
trait Tables {
    /// The state, expanded under the current grammar. Returns whether an
    /// expansion was performed.
    fn expanded(&mut self, id: StateId) -> Result<(&State, bool), EngineError>;
}

struct Lazy<'a> {
    fsa: &'a mut Fsa,
    g: &'a Grammar,
}

impl Tables for Lazy<'_> {
    fn expanded(&mut self, id: StateId) -> Result<(&State, bool), EngineError> {
        if self.fsa.state(id).is_none() {
            return Err(inconsistent(format!("missing state {id}")));
        }
        let performed = self.fsa.ensure_expanded(self.g, id).performed;
        Ok((self.fsa.state(id).expect("checked above"), performed))
    }
}

struct Frozen<'a> {
    fsa: &'a Fsa,
    version: u64,
}

impl Tables for Frozen<'_> {
    fn expanded(&mut self, id: StateId) -> Result<(&State, bool), EngineError> {
        match self.fsa.state(id) {
            Some(s) if s.expansion.as_ref().is_some_and(|e| e.version == self.version) => Ok((s, false)),
            _ => Err(inconsistent(format!("state {id} is not expanded for this grammar"))),
        }
    }
}

fn inconsistent(msg: impl Into<String>) -> EngineError {
    EngineError::InternalInconsistency(msg.into())
}

/// Consumes stack entries from the top following a reverse traversal of
/// part of an elementary tree, checking every label on the way.
struct Walker<'a> {
    entries: &'a [StackEntry],
    remaining: usize,
}

impl<'a> Walker<'a> {
    fn new(entries: &'a [StackEntry]) -> Self {
        Walker {
            remaining: entries.len(),
            entries,
        }
    }

    fn consumed(&self) -> usize {
        self.entries.len() - self.remaining
    }

    fn pop(&mut self, expected: &str) -> Result<&'a StackEntry, EngineError> {
        if self.remaining == 0 {
            return Err(inconsistent(format!("stack underflow expecting {expected}")));
        }
        self.remaining -= 1;
        Ok(&self.entries[self.remaining])
    }

    /// A node as seen from its parent: a starred node stands for one
    /// right mark, anything else for its content.
    fn node(
        &mut self,
        tree: &ElementaryTree,
        addr: &Address,
        stars: &BTreeSet<Address>,
    ) -> Result<Option<FootInfo>, EngineError> {
        if !stars.contains(addr) {
            return self.content(tree, addr, stars);
        }
        let entry = self.pop("a right mark")?;
        let EntryLabel::RightMark { foot, .. } = &entry.label else {
            return Err(inconsistent(format!(
                "expected right mark for {}@{addr}, found {}",
                tree.name(),
                entry.label
            )));
        };
        let covers_foot = tree.foot().is_some_and(|f| addr.dominates(f));
        if covers_foot != foot.is_some() {
            return Err(inconsistent(format!(
                "right mark at {}@{addr} disagrees about the foot",
                tree.name()
            )));
        }
        Ok(foot.clone())
    }

    /// The material spanned by the node itself (below it, or under the foot).
    fn content(
        &mut self,
        tree: &ElementaryTree,
        addr: &Address,
        stars: &BTreeSet<Address>,
    ) -> Result<Option<FootInfo>, EngineError> {
        let node = tree
            .node(addr)
            .ok_or_else(|| inconsistent(format!("no node {}@{addr}", tree.name())))?;
        match node {
            Node::Epsilon => Ok(None),
            Node::Terminal(t) => {
                let entry = self.pop("a terminal")?;
                match &entry.label {
                    EntryLabel::Term(found) if found == t => Ok(None),
                    other => Err(inconsistent(format!(
                        "expected terminal {t} for {}@{addr}, found {other}",
                        tree.name()
                    ))),
                }
            }
            Node::Foot { .. } => {
                let entry = self.pop("a foot mark")?;
                let EntryLabel::FootMark { k, foot } = &entry.label else {
                    return Err(inconsistent(format!(
                        "expected foot mark for {}@{addr}, found {}",
                        tree.name(),
                        entry.label
                    )));
                };
                if *k > self.remaining {
                    return Err(inconsistent("stack underflow skipping foot material"));
                }
                self.remaining -= k;
                Ok(Some(foot.clone()))
            }
            Node::Interior { children, .. } => {
                let mut found = None;
                for i in (1..=children.len() as u32).rev() {
                    if let Some(info) = self.node(tree, &addr.child(i), stars)? {
                        found = Some(info);
                    }
                }
                Ok(found)
            }
        }
    }
}

fn tree_of<'g>(g: &'g Grammar, item: &DottedItem) -> Result<&'g ElementaryTree, EngineError> {
    g.tree(&item.tree)
        .ok_or_else(|| inconsistent(format!("item names unknown tree {}", item.tree)))
}

/// Number of entries on top of `config` spanned by the node of a
/// resume-right item.
pub fn measure_segment(
    config: &Config,
    g: &Grammar,
    item: &DottedItem,
) -> Result<usize, EngineError> {
    let tree = tree_of(g, item)?;
    let mut walker = Walker::new(&config.entries);
    walker.content(tree, &item.addr, &item.stars)?;
    Ok(walker.consumed())
}

struct Succ {
    config: Config,
}

fn push_event(config: &Config, event: Event) -> Config {
    let mut next = config.clone();
    next.path.push(event);
    next
}

/// Applies every applicable action of the top state, in table order.
fn step<T: Tables>(
    tables: &mut T,
    g: &Grammar,
    config: &Config,
    tokens: &[Symbol],
    min_aux_terminals: usize,
    stats: &mut ParseStats,
) -> Result<Vec<Succ>, EngineError> {
    let (top, expanded) = tables.expanded(config.top_state())?;
    stats.expansions += expanded as u64;
    let actions: Vec<Action> = top.actions().expect("expanded").iter().cloned().collect();
    let mut out = Vec::new();
    for action in actions {
        match action {
            Action::Shift { terminal } => {
                if tokens.get(config.cursor) != Some(&terminal) {
                    continue;
                }
                let (top, _) = tables.expanded(config.top_state())?;
                let label = TransLabel::Term { terminal: terminal.clone() };
                let target = top
                    .transition(&label)
                    .ok_or_else(|| inconsistent(format!("shift without transition on {terminal}")))?;
                let mut next = push_event(config, Event::Shift(terminal.clone()));
                next.entries.push(StackEntry {
                    state: target,
                    label: EntryLabel::Term(terminal),
                });
                next.cursor += 1;
                out.push(Succ { config: next });
            }
            Action::ResumeRight { item } => {
                // Every foot mark left on the stack is a distinct adjunction
                // still to be reduced, and each will claim at least
                // `min_aux_terminals` tokens of the input.
                if min_aux_terminals > 0 {
                    let pending = config
                        .entries
                        .iter()
                        .filter(|e| matches!(e.label, EntryLabel::FootMark { .. }))
                        .count();
                    if (pending + 1) * min_aux_terminals > tokens.len() {
                        continue;
                    }
                }
                let tree = tree_of(g, &item)?;
                let mut walker = Walker::new(&config.entries);
                let inner = walker.content(tree, &item.addr, &item.stars)?;
                let k = walker.consumed();
                let predictor = state_below(&config.entries, config.entries.len() - k);
                let (pstate, expanded) = tables.expanded(predictor)?;
                stats.expansions += expanded as u64;
                let target = pstate.transition(&TransLabel::Foot).ok_or_else(|| {
                    inconsistent(format!("no foot transition at predictor state {predictor} for {item}"))
                })?;
                let mut next = push_event(config, Event::Resume { k });
                next.entries.push(StackEntry {
                    state: target,
                    label: EntryLabel::FootMark {
                        k,
                        foot: FootInfo {
                            host: NodeRef::new(item.tree.clone(), item.addr.clone()),
                            inner: inner.map(Box::new),
                        },
                    },
                });
                out.push(Succ { config: next });
            }
            Action::ReduceRoot { item } => {
                let tree = tree_of(g, &item)?;
                let mut walker = Walker::new(&config.entries);
                let foot = walker
                    .node(tree, &item.addr, &item.stars)?
                    .ok_or_else(|| inconsistent(format!("reduce of {} found no foot", item.tree)))?;
                let keep = walker.remaining;
                let exposed = state_below(&config.entries, keep);
                let (estate, expanded) = tables.expanded(exposed)?;
                stats.expansions += expanded as u64;
                let label = TransLabel::Right {
                    aux: item.tree.clone(),
                    host: foot.host.clone(),
                };
                // The adjoined tree wrapped a node the exposed state did not
                // predict it at: this branch is dead.
                let Some(target) = estate.transition(&label) else { continue };
                let mut next = push_event(config, Event::Reduce(item.tree.clone()));
                next.entries.truncate(keep);
                next.entries.push(StackEntry {
                    state: target,
                    label: EntryLabel::RightMark {
                        aux: item.tree.clone(),
                        foot: foot.inner.map(|b| *b),
                    },
                });
                out.push(Succ { config: next });
            }
            Action::Accept { item } => {
                if config.cursor != tokens.len() {
                    continue;
                }
                let tree = tree_of(g, &item)?;
                let mut walker = Walker::new(&config.entries);
                if walker.node(tree, &item.addr, &item.stars)?.is_some() {
                    return Err(inconsistent("initial tree walk found a foot"));
                }
                if walker.remaining != 0 {
                    continue;
                }
                let mut next = push_event(config, Event::Accept);
                next.accepted = true;
                out.push(Succ { config: next });
            }
        }
    }
    Ok(out)
}

fn trace_line(n: u64, config: &Config) -> String {
    let event = config.path.last().expect("successor has an event");
    format!(
        "step={n} action={event} pos={} depth={} state={}",
        config.cursor,
        config.entries.len(),
        config.top_state()
    )
}

fn run<T: Tables, S: AsRef<str>>(
    mut tables: T,
    g: &Grammar,
    tokens: &[S],
    opts: &ParseOptions,
) -> Result<ParseOutcome, EngineError> {
    let mut stats = ParseStats::default();
    let mut trace = opts.trace.then(Vec::new);
    let alphabet = g.terminals();
    let mut symbols = Vec::with_capacity(tokens.len());
    for tok in tokens {
        match Symbol::new(tok.as_ref()).filter(|s| alphabet.contains(s)) {
            Some(s) => symbols.push(s),
            None => {
                return Ok(ParseOutcome {
                    verdict: Verdict::Reject,
                    stats,
                    trace,
                    path: Vec::new(),
                    diagnostic: Some(format!("unknown token {:?}", tok.as_ref())),
                })
            }
        }
    }

    let min_aux_terminals = g.auxiliary_trees().map(|t| t.terminals().len()).min().unwrap_or(0);
    let mut pending = vec![Config::default()];
    let mut seen: HashSet<(Vec<StackEntry>, usize)> = HashSet::new();
    while let Some(config) = pending.pop() {
        if config.accepted {
            return Ok(ParseOutcome {
                verdict: Verdict::Accept,
                stats,
                trace,
                path: config.path,
                diagnostic: None,
            });
        }
        let succs = step(&mut tables, g, &config, &symbols, min_aux_terminals, &mut stats)?;
        if succs.is_empty() {
            stats.backtracks += 1;
            continue;
        }
        let before = pending.len();
        for succ in succs.into_iter().rev() {
            // What follows a configuration depends only on its stack and
            // position, so a repeat can add nothing.
            if succ.config.accepted || seen.insert((succ.config.entries.clone(), succ.config.cursor)) {
                pending.push(succ.config);
            }
        }
        if pending.len() == before {
            stats.backtracks += 1;
            continue;
        }
        // Trace and count in exploration order: the next config popped is
        // the first alternative.
        let next = pending.last().expect("just pushed");
        stats.steps += 1;
        stats.max_depth = stats.max_depth.max(next.entries.len());
        if stats.steps > opts.step_budget {
            return Err(EngineError::StepBudgetExceeded {
                budget: opts.step_budget,
                suspect: g
                    .auxiliary_trees()
                    .find(|t| t.terminals().is_empty())
                    .map(|t| t.name().to_string()),
            });
        }
        if let Some(lines) = trace.as_mut() {
            lines.push(trace_line(stats.steps, next));
        }
    }
    Ok(ParseOutcome {
        verdict: Verdict::Reject,
        stats,
        trace,
        path: Vec::new(),
        diagnostic: None,
    })
}

/// Parses `tokens`, expanding kernel-form states as the driver reaches them.
pub fn parse<S: AsRef<str>>(
    fsa: &mut Fsa,
    g: &Grammar,
    tokens: &[S],
    opts: &ParseOptions,
) -> Result<ParseOutcome, EngineError> {
    run(Lazy { fsa, g }, g, tokens, opts)
}

/// Parses against an automaton that must already hold every state the input
/// needs, expanded for `g`. Never mutates, so many parses can share one table.
pub fn parse_frozen<S: AsRef<str>>(
    fsa: &Fsa,
    g: &Grammar,
    tokens: &[S],
    opts: &ParseOptions,
) -> Result<ParseOutcome, EngineError> {
    run(
        Frozen {
            fsa,
            version: g.version(),
        },
        g,
        tokens,
        opts,
    )
}
