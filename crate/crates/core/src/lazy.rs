//! On-demand expansion and incremental repair of the automaton when trees
//! are added to or removed from the grammar.
//!
//! An edit returns the affected states to kernel form and leaves every other
//! state untouched, including states that become unreachable. Later lazy
//! expansion reconnects to those retained states through kernel interning.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::EditError;
use crate::fsa::{start_kernel, ExpansionRecord, Fsa, StateId};
use crate::grammar::{validate, ElementaryTree, Grammar, TreeKind};
use crate::items::{self, DotPos, TransLabel};

/// An automaton with only the (unexpanded) start state.
pub fn build_lazy(g: &Grammar) -> Fsa {
    Fsa::with_start(g)
}

pub fn ensure_expanded(fsa: &mut Fsa, g: &Grammar, id: StateId) -> ExpansionRecord {
    fsa.ensure_expanded(g, id)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrammarEdit {
    AddInitial(ElementaryTree),
    AddAuxiliary(ElementaryTree),
    Remove(String),
}

impl GrammarEdit {
    /// An addition of the right kind for `tree`.
    pub fn add(tree: ElementaryTree) -> GrammarEdit {
        match tree.kind() {
            TreeKind::Initial => GrammarEdit::AddInitial(tree),
            TreeKind::Auxiliary => GrammarEdit::AddAuxiliary(tree),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EditReport {
    /// States returned to kernel form (ids kept).
    pub rekerneled: BTreeSet<StateId>,
    /// States deleted because their kernel became empty or duplicated another.
    pub removed: BTreeSet<StateId>,
    pub dropped_transitions: usize,
    /// States kept although unreachable from the start state.
    pub retained_unreachable: usize,
    /// Grammar version after the edit.
    pub version: u64,
}

/// Applies `edit` to `g`, repairing `fsa` in place. Returns the edited grammar.
pub fn apply_edit(
    fsa: &mut Fsa,
    g: &Grammar,
    edit: &GrammarEdit,
) -> Result<(Grammar, EditReport), EditError> {
    let next = match edit {
        GrammarEdit::AddInitial(tree) => {
            expect_kind(tree, TreeKind::Initial)?;
            g.with_tree(tree.clone())?
        }
        GrammarEdit::AddAuxiliary(tree) => {
            expect_kind(tree, TreeKind::Auxiliary)?;
            g.with_tree(tree.clone())?
        }
        GrammarEdit::Remove(name) => g.without_tree(name)?,
    };
    let findings = validate(&next);
    if !findings.is_empty() {
        return Err(EditError::Invalid(findings));
    }

    let mut report = EditReport {
        version: next.version(),
        ..Default::default()
    };
    match edit {
        GrammarEdit::AddInitial(tree) => {
            let affected = affected_by_initial(fsa, &next, tree);
            for id in affected {
                rekernel(fsa, id, &mut report);
            }
            let kernel = start_kernel(&next);
            let replaced = fsa.replace_kernel(StateId::START, kernel);
            debug_assert!(replaced, "start kernel is never shared");
        }
        GrammarEdit::AddAuxiliary(tree) => {
            for id in affected_by_auxiliary(fsa, &next, tree) {
                rekernel(fsa, id, &mut report);
            }
        }
        GrammarEdit::Remove(name) => remove_tree(fsa, name, &mut report),
    }

    // Transitions into deleted states can only come from rekerneled states,
    // but a stale edge would break the parser, so scrub unconditionally.
    let dangling: Vec<StateId> = fsa
        .states()
        .filter(|s| {
            s.expansion
                .iter()
                .flat_map(|e| e.transitions.values())
                .any(|t| fsa.state(*t).is_none())
        })
        .map(|s| s.id)
        .collect();
    for id in dangling {
        rekernel(fsa, id, &mut report);
    }

    for state in fsa.states_mut() {
        if let Some(exp) = state.expansion.as_mut() {
            exp.version = next.version();
        }
    }
    fsa.set_version(next.version());
    report.retained_unreachable = fsa.len() - fsa.reachable().len();
    Ok((next, report))
}

fn expect_kind(tree: &ElementaryTree, kind: TreeKind) -> Result<(), EditError> {
    let name = |k| match k {
        TreeKind::Initial => "an initial tree",
        TreeKind::Auxiliary => "an auxiliary tree",
    };
    if tree.kind() == kind {
        Ok(())
    } else {
        Err(EditError::WrongKind {
            name: tree.name().to_string(),
            expected: name(kind),
            actual: name(tree.kind()),
        })
    }
}

fn rekernel(fsa: &mut Fsa, id: StateId, report: &mut EditReport) {
    let Some(state) = fsa.state_mut(id) else { return };
    if let Some(exp) = state.expansion.take() {
        report.dropped_transitions += exp.transitions.len();
    }
    report.rekerneled.insert(id);
}

/// Auxiliary trees that can adjoin somewhere inside `tree`.
fn adjoinable_into(g: &Grammar, tree: &ElementaryTree) -> BTreeSet<String> {
    tree.addresses()
        .iter()
        .filter_map(|addr| tree.node(addr))
        .flat_map(|node| g.node_adjoiners(node).map(|a| a.name().to_string()))
        .collect()
}

/// Expanded states holding a foot-LB item of one of `feet`: the states where
/// left completion could enter a node of the new tree.
fn left_completion_sites(fsa: &Fsa, g: &Grammar, feet: &BTreeSet<String>) -> BTreeSet<StateId> {
    fsa.states()
        .filter_map(|s| Some((s.id, &s.expansion.as_ref()?.closure)))
        .filter(|(_, closure)| {
            closure.iter().any(|item| {
                item.pos == DotPos::LB
                    && feet.contains(&item.tree)
                    && g.tree(&item.tree).and_then(|t| t.foot()) == Some(&item.addr)
            })
        })
        .map(|(id, _)| id)
        .collect()
}

fn affected_by_initial(fsa: &Fsa, next: &Grammar, tree: &ElementaryTree) -> BTreeSet<StateId> {
    let mut out = left_completion_sites(fsa, next, &adjoinable_into(next, tree));
    out.insert(StateId::START);
    out
}

fn affected_by_auxiliary(fsa: &Fsa, next: &Grammar, tree: &ElementaryTree) -> BTreeSet<StateId> {
    let name = tree.name();
    let mut out = left_completion_sites(fsa, next, &adjoinable_into(next, tree));
    for state in fsa.states() {
        let Some(exp) = &state.expansion else { continue };
        let predicts = exp.closure.iter().any(|item| {
            item.pos == DotPos::LA && next.can_adjoin(name, &item.tree, &item.addr)
        });
        let has_right = exp
            .transitions
            .keys()
            .any(|l| matches!(l, TransLabel::Right { aux, .. } if aux == name));
        if predicts || has_right {
            out.insert(state.id);
        }
    }
    out
}

fn remove_tree(fsa: &mut Fsa, name: &str, report: &mut EditReport) {
    let mentions: Vec<StateId> = fsa
        .states()
        .filter(|s| {
            let in_items = s.items().iter().chain(&s.kernel).any(|i| i.tree == name);
            let in_labels = s.expansion.iter().flat_map(|e| e.transitions.keys()).any(
                |l| matches!(l, TransLabel::Right { aux, host } if aux == name || host.tree == name),
            );
            in_items || in_labels
        })
        .map(|s| s.id)
        .collect();
    for id in mentions {
        rekernel(fsa, id, report);
        let state = fsa.state(id).expect("state exists");
        let kernel: items::ItemSet = state.kernel.iter().filter(|i| i.tree != name).cloned().collect();
        if kernel == state.kernel {
            continue;
        }
        if id == StateId::START {
            fsa.replace_kernel(id, kernel);
            continue;
        }
        // An emptied kernel, or one now equal to another state's, is deleted;
        // every edge into it came from a state rekerneled here.
        if kernel.is_empty() || !fsa.replace_kernel(id, kernel) {
            fsa.remove_state(id);
            report.rekerneled.remove(&id);
            report.removed.insert(id);
        }
    }
}

/// Exhaustively expands both automata and checks that their reachable parts
/// are isomorphic when states are matched by kernel, with equal transition
/// labels and action sets.
pub fn equivalent(a: &Fsa, g: &Grammar, b: &Fsa) -> bool {
    let mut a = a.clone();
    let mut b = b.clone();
    a.expand_all(g);
    b.expand_all(g);
    let mut pairing: HashMap<StateId, StateId> = HashMap::new();
    let mut reverse: HashMap<StateId, StateId> = HashMap::new();
    let mut queue = VecDeque::from([(StateId::START, StateId::START)]);
    pairing.insert(StateId::START, StateId::START);
    reverse.insert(StateId::START, StateId::START);
    while let Some((ia, ib)) = queue.pop_front() {
        let (sa, sb) = (a.state(ia).expect("reachable"), b.state(ib).expect("reachable"));
        if sa.kernel != sb.kernel {
            return false;
        }
        let (ea, eb) = (
            sa.expansion.as_ref().expect("expanded"),
            sb.expansion.as_ref().expect("expanded"),
        );
        if ea.actions != eb.actions || ea.closure != eb.closure {
            return false;
        }
        let la: Vec<&TransLabel> = ea.transitions.keys().collect();
        let lb: Vec<&TransLabel> = eb.transitions.keys().collect();
        if la != lb {
            return false;
        }
        for (label, &ta) in &ea.transitions {
            let tb = eb.transitions[label];
            match (pairing.get(&ta), reverse.get(&tb)) {
                (None, None) => {
                    pairing.insert(ta, tb);
                    reverse.insert(tb, ta);
                    queue.push_back((ta, tb));
                }
                (Some(&pb), Some(&pa)) if pb == tb && pa == ta => {}
                _ => return false,
            }
        }
    }
    true
}

/// Kernel of each successor state, keyed by label. Used to compare an
/// expansion's stored edges against a recomputation.
pub fn successor_kernels(fsa: &Fsa, id: StateId) -> Option<BTreeMap<TransLabel, items::ItemSet>> {
    let exp = fsa.state(id)?.expansion.as_ref()?;
    exp.transitions
        .iter()
        .map(|(l, t)| Some((l.clone(), fsa.state(*t)?.kernel.clone())))
        .collect()
}
