use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grammar::{Address, Grammar};
use crate::items::{self, Action, DotPos, DottedItem, ItemSet, TransLabel};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u32);

impl StateId {
    pub const START: StateId = StateId(0);
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateStatus {
    KernelForm,
    Expanded,
}

/// Everything computed when a kernel is closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub closure: ItemSet,
    pub transitions: BTreeMap<TransLabel, StateId>,
    pub actions: BTreeSet<Action>,
    /// Grammar version the expansion was computed against.
    pub version: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub id: StateId,
    pub kernel: ItemSet,
    pub expansion: Option<Expansion>,
}

impl State {
    pub fn status(&self) -> StateStatus {
        if self.expansion.is_some() {
            StateStatus::Expanded
        } else {
            StateStatus::KernelForm
        }
    }

    pub fn is_expanded(&self) -> bool {
        self.expansion.is_some()
    }

    pub fn transition(&self, label: &TransLabel) -> Option<StateId> {
        self.expansion.as_ref()?.transitions.get(label).copied()
    }

    pub fn actions(&self) -> Option<&BTreeSet<Action>> {
        self.expansion.as_ref().map(|e| &e.actions)
    }

    /// Closure when expanded, otherwise the kernel.
    pub fn items(&self) -> &ItemSet {
        self.expansion.as_ref().map_or(&self.kernel, |e| &e.closure)
    }

    pub fn accepts(&self) -> bool {
        self.actions()
            .is_some_and(|a| a.iter().any(|a| matches!(a, Action::Accept { .. })))
    }

    pub fn is_conflicted(&self) -> bool {
        self.actions().is_some_and(items::is_conflicted)
    }

    /// Drops closure, transitions and actions, keeping the kernel.
    pub fn rekernel(&mut self) {
        self.expansion = None;
    }
}

/// A state whose action set leaves the driver a choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub state: StateId,
    pub actions: Vec<Action>,
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let acts: Vec<String> = self.actions.iter().map(ToString::to_string).collect();
        write!(f, "state {}: {}", self.state, acts.join(" | "))
    }
}

/// Work done by one expansion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpansionRecord {
    pub state: StateId,
    /// Items added to the kernel by the closure; zero when nothing was done.
    pub closure_added: usize,
    pub created: Vec<StateId>,
    pub reused: Vec<StateId>,
    /// False when the state was already expanded at the current version.
    pub performed: bool,
}

/// The LR automaton. States are interned by kernel; unreachable states are
/// kept until [`Fsa::purge_unreachable`] is called.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fsa {
    states: BTreeMap<StateId, State>,
    index: HashMap<ItemSet, StateId>,
    next_id: u32,
    version: u64,
}

/// Kernel of the start state: start-label initial trees, dot left-above the root.
pub fn start_kernel(g: &Grammar) -> ItemSet {
    g.start_trees()
        .map(|t| DottedItem::new(t.name(), Address::root(), DotPos::LA))
        .collect()
}

impl Fsa {
    /// An automaton holding only the unexpanded start state.
    pub fn with_start(g: &Grammar) -> Fsa {
        let mut fsa = Fsa {
            states: BTreeMap::new(),
            index: HashMap::new(),
            next_id: 0,
            version: g.version(),
        };
        let (id, _) = fsa.intern_kernel(start_kernel(g));
        debug_assert_eq!(id, StateId::START);
        fsa
    }

    /// Reassembles an automaton from its parts, rebuilding the kernel index.
    pub(crate) fn from_parts(states: Vec<State>, next_id: u32, version: u64) -> Result<Fsa, String> {
        let mut fsa = Fsa {
            states: BTreeMap::new(),
            index: HashMap::new(),
            next_id,
            version,
        };
        for state in states {
            if state.id.0 >= next_id {
                return Err(format!("state {} not below next id {next_id}", state.id));
            }
            if fsa.index.insert(state.kernel.clone(), state.id).is_some() {
                return Err(format!("state {} duplicates another kernel", state.id));
            }
            if fsa.states.insert(state.id, state).is_some() {
                return Err("duplicate state id".into());
            }
        }
        if !fsa.states.contains_key(&StateId::START) {
            return Err("missing start state".into());
        }
        for state in fsa.states.values() {
            for target in state.expansion.iter().flat_map(|e| e.transitions.values()) {
                if !fsa.states.contains_key(target) {
                    return Err(format!("state {} has a transition to missing state {target}", state.id));
                }
            }
        }
        Ok(fsa)
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub(crate) fn set_version(&mut self, version: u64) {
        self.version = version;
    }

    pub fn next_id(&self) -> u32 {
        self.next_id
    }

    pub fn state(&self, id: StateId) -> Option<&State> {
        self.states.get(&id)
    }

    pub(crate) fn state_mut(&mut self, id: StateId) -> Option<&mut State> {
        self.states.get_mut(&id)
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.states.values()
    }

    pub(crate) fn states_mut(&mut self) -> impl Iterator<Item = &mut State> {
        self.states.values_mut()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn expanded_count(&self) -> usize {
        self.states.values().filter(|s| s.is_expanded()).count()
    }

    pub fn lookup(&self, kernel: &ItemSet) -> Option<StateId> {
        self.index.get(kernel).copied()
    }

    /// Returns the state holding `kernel`, creating a kernel-form state if
    /// no state (reachable or not) has it.
    pub fn intern_kernel(&mut self, kernel: ItemSet) -> (StateId, bool) {
        if let Some(&id) = self.index.get(&kernel) {
            return (id, false);
        }
        let id = StateId(self.next_id);
        self.next_id += 1;
        self.index.insert(kernel.clone(), id);
        self.states.insert(
            id,
            State {
                id,
                kernel,
                expansion: None,
            },
        );
        (id, true)
    }

    /// Replaces a state's kernel, keeping its id. Returns false (and leaves
    /// the automaton untouched) if another state already owns the kernel.
    pub(crate) fn replace_kernel(&mut self, id: StateId, kernel: ItemSet) -> bool {
        if let Some(&other) = self.index.get(&kernel) {
            return other == id;
        }
        let state = self.states.get_mut(&id).expect("state exists");
        self.index.remove(&state.kernel);
        state.kernel = kernel.clone();
        self.index.insert(kernel, id);
        true
    }

    pub(crate) fn remove_state(&mut self, id: StateId) -> Option<State> {
        let state = self.states.remove(&id)?;
        self.index.remove(&state.kernel);
        Some(state)
    }

    /// Closes a state and interns its successors under `g`, unless it is
    /// already expanded at `g`'s version. Successors stay in kernel form.
    pub fn ensure_expanded(&mut self, g: &Grammar, id: StateId) -> ExpansionRecord {
        let state = self.states.get(&id).expect("state exists");
        if state
            .expansion
            .as_ref()
            .is_some_and(|e| e.version == g.version())
        {
            return ExpansionRecord {
                state: id,
                ..Default::default()
            };
        }
        let kernel = state.kernel.clone();
        let closure = items::close(&kernel, g);
        let actions = items::actions(&closure, g);
        let mut record = ExpansionRecord {
            state: id,
            closure_added: closure.len() - kernel.len(),
            performed: true,
            ..Default::default()
        };
        let mut transitions = BTreeMap::new();
        for (label, succ_kernel) in items::successors(&closure, g) {
            let (target, created) = self.intern_kernel(succ_kernel);
            if created {
                record.created.push(target);
            } else {
                record.reused.push(target);
            }
            transitions.insert(label, target);
        }
        let state = self.states.get_mut(&id).expect("state exists");
        state.expansion = Some(Expansion {
            closure,
            transitions,
            actions,
            version: g.version(),
        });
        record
    }

    /// Expands every state reachable from the start state. Returns the
    /// number of expansions performed.
    pub fn expand_all(&mut self, g: &Grammar) -> usize {
        let mut performed = 0;
        let mut queue = VecDeque::from([StateId::START]);
        let mut seen = BTreeSet::from([StateId::START]);
        while let Some(id) = queue.pop_front() {
            if self.ensure_expanded(g, id).performed {
                performed += 1;
            }
            let state = &self.states[&id];
            for &target in state.expansion.as_ref().expect("just expanded").transitions.values() {
                if seen.insert(target) {
                    queue.push_back(target);
                }
            }
        }
        performed
    }

    /// States reachable from the start state through existing transitions.
    pub fn reachable(&self) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::from([StateId::START]);
        let mut stack = vec![StateId::START];
        while let Some(id) = stack.pop() {
            let Some(state) = self.states.get(&id) else { continue };
            for &target in state.expansion.iter().flat_map(|e| e.transitions.values()) {
                if seen.insert(target) {
                    stack.push(target);
                }
            }
        }
        seen
    }

    /// Removes states unreachable from the start state.
    pub fn purge_unreachable(&mut self) -> usize {
        let keep = self.reachable();
        let doomed: Vec<StateId> = self
            .states
            .keys()
            .filter(|id| !keep.contains(id))
            .copied()
            .collect();
        for id in &doomed {
            self.remove_state(*id);
        }
        doomed.len()
    }

    pub fn conflicts(&self) -> Vec<Conflict> {
        self.states
            .values()
            .filter(|s| s.is_conflicted())
            .map(|s| Conflict {
                state: s.id,
                actions: s.actions().expect("expanded").iter().cloned().collect(),
            })
            .collect()
    }
}

/// Builds the full automaton up front. States are numbered breadth-first
/// from the start state, visiting edges in label order.
pub fn build_eager(g: &Grammar) -> Fsa {
    let mut fsa = Fsa::with_start(g);
    fsa.expand_all(g);
    fsa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn intern_is_canonical() {
        let g = fixtures::g1();
        let mut fsa = Fsa::with_start(&g);
        let k: ItemSet = [DottedItem::new("beta", "1".parse().unwrap(), DotPos::RA)].into();
        let (a, created_a) = fsa.intern_kernel(k.clone());
        let (b, created_b) = fsa.intern_kernel(k.clone());
        assert_eq!(a, b);
        assert!(created_a && !created_b);
        let starred: ItemSet = [DottedItem::new("beta", "1".parse().unwrap(), DotPos::RA)
            .with_stars([Address::root()])]
        .into();
        let (c, created_c) = fsa.intern_kernel(starred);
        assert!(created_c);
        assert_ne!(a, c);
    }

    #[test]
    fn single_tree_grammar() {
        let g = fixtures::single();
        let fsa = build_eager(&g);
        assert_eq!(fsa.len(), 2);
        let after_e = fsa.state(StateId(1)).unwrap();
        assert!(after_e.accepts());
        assert!(after_e.expansion.as_ref().unwrap().transitions.is_empty());
        assert!(!fsa.state(StateId::START).unwrap().accepts());
    }

    #[test]
    fn eager_g1_is_deterministic_and_fully_expanded() {
        let g = fixtures::g1();
        let a = build_eager(&g);
        let b = build_eager(&g);
        assert_eq!(a, b);
        assert!(a.states().all(State::is_expanded));
        assert_eq!(a.reachable().len(), a.len());
        assert_eq!(a.state(StateId::START).unwrap().kernel, start_kernel(&g));
    }

    #[test]
    fn successor_kernels_hold_only_right_positions() {
        let fsa = build_eager(&fixtures::g2());
        for state in fsa.states().filter(|s| s.id != StateId::START) {
            assert!(state
                .kernel
                .iter()
                .all(|i| matches!(i.pos, DotPos::RA | DotPos::RB)));
        }
    }

    #[test]
    fn closures_are_fixpoints() {
        let g = fixtures::g1();
        let fsa = build_eager(&g);
        for state in fsa.states() {
            let closure = state.items();
            assert!(state.kernel.is_subset(closure));
            assert_eq!(&items::close(closure, &g), closure);
        }
    }

    #[test]
    fn stars_stay_on_traversed_nodes() {
        // Every starred address is an ancestor-or-self of the dot, lies
        // below a node the dot has passed, or precedes it in traversal order.
        let g = fixtures::g2();
        let fsa = build_eager(&g);
        for state in fsa.states() {
            for item in state.items() {
                for star in &item.stars {
                    let below = item.addr.dominates(star) && matches!(item.pos, DotPos::RB | DotPos::RA);
                    let ok = star.dominates(&item.addr) || below || star < &item.addr;
                    assert!(ok, "{item} in state {}", state.id);
                }
            }
        }
    }

    #[test]
    fn conflict_grammar_flags_reduce_reduce() {
        let fsa = build_eager(&fixtures::g_conflict());
        let found = fsa.conflicts().iter().any(|c| {
            let reduced: BTreeSet<&str> = c
                .actions
                .iter()
                .filter_map(|a| match a {
                    Action::ReduceRoot { item } => Some(item.tree.as_str()),
                    _ => None,
                })
                .collect();
            reduced == BTreeSet::from(["beta", "beta2"])
        });
        assert!(found);
    }

    #[test]
    fn purge_fresh_is_noop() {
        let mut fsa = build_eager(&fixtures::g2());
        assert_eq!(fsa.purge_unreachable(), 0);
    }
}
