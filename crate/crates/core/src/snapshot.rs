//! JSON persistence of an automaton, tied to the grammar it was built for.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::SnapshotError;
use crate::fsa::{Expansion, Fsa, State, StateId, StateStatus};
use crate::grammar::Grammar;
use crate::items::{Action, ItemSet, TransLabel};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub grammar_hash: String,
    pub start: StateId,
    pub next_id: u32,
    pub states: Vec<SnapshotState>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotState {
    pub id: StateId,
    pub status: StateStatus,
    pub kernel: ItemSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure: Option<ItemSet>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub transitions: Vec<SnapshotEdge>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub actions: BTreeSet<Action>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEdge {
    pub label: TransLabel,
    pub target: StateId,
}

impl Snapshot {
    /// Captures `fsa`. States expanded under an older grammar version are
    /// stored in kernel form.
    pub fn capture(fsa: &Fsa, g: &Grammar) -> Snapshot {
        Snapshot::capture_with_hash(fsa, g.content_hash())
    }

    /// Like [`Snapshot::capture`] for an automaton whose grammar is known
    /// only by hash.
    pub fn capture_with_hash(fsa: &Fsa, grammar_hash: String) -> Snapshot {
        let states = fsa
            .states()
            .map(|s| {
                let exp = s.expansion.as_ref().filter(|e| e.version == fsa.version());
                SnapshotState {
                    id: s.id,
                    status: if exp.is_some() { StateStatus::Expanded } else { StateStatus::KernelForm },
                    kernel: s.kernel.clone(),
                    closure: exp.map(|e| e.closure.clone()),
                    transitions: exp
                        .into_iter()
                        .flat_map(|e| &e.transitions)
                        .map(|(label, target)| SnapshotEdge { label: label.clone(), target: *target })
                        .collect(),
                    actions: exp.map(|e| e.actions.clone()).unwrap_or_default(),
                }
            })
            .collect();
        Snapshot {
            format_version: FORMAT_VERSION,
            grammar_hash,
            start: StateId::START,
            next_id: fsa.next_id(),
            states,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Snapshot, SnapshotError> {
        let snap: Snapshot = serde_json::from_str(text)?;
        if snap.format_version != FORMAT_VERSION {
            return Err(SnapshotError::Version(snap.format_version));
        }
        Ok(snap)
    }

    /// Rebuilds the automaton as stored, without a grammar to check it
    /// against. Suitable for inspection only: expansions are stamped with
    /// version 0.
    pub fn to_fsa(&self) -> Result<Fsa, SnapshotError> {
        self.states_for(0, false)
    }

    /// Rebuilds the automaton for `g`. A snapshot taken for a different
    /// grammar is refused unless `force_rekernel` is set, in which case
    /// every state is loaded in kernel form.
    pub fn restore(&self, g: &Grammar, force_rekernel: bool) -> Result<Fsa, SnapshotError> {
        let actual = g.content_hash();
        let mismatch = actual != self.grammar_hash;
        if mismatch && !force_rekernel {
            return Err(SnapshotError::GrammarMismatch {
                expected: self.grammar_hash.clone(),
                actual,
            });
        }
        self.states_for(g.version(), mismatch)
    }

    fn states_for(&self, version: u64, kernel_only: bool) -> Result<Fsa, SnapshotError> {
        if self.start != StateId::START {
            return Err(SnapshotError::Inconsistent(format!("start state {} is not 0", self.start)));
        }
        let mut states = Vec::with_capacity(self.states.len());
        for s in &self.states {
            let expansion = match (s.status, &s.closure) {
                (StateStatus::KernelForm, _) => None,
                _ if kernel_only => None,
                (StateStatus::Expanded, Some(closure)) => {
                    let transitions: BTreeMap<TransLabel, StateId> =
                        s.transitions.iter().map(|e| (e.label.clone(), e.target)).collect();
                    if transitions.len() != s.transitions.len() {
                        return Err(SnapshotError::Inconsistent(format!(
                            "state {} has duplicate transition labels",
                            s.id
                        )));
                    }
                    Some(Expansion {
                        closure: closure.clone(),
                        transitions,
                        actions: s.actions.clone(),
                        version,
                    })
                }
                (StateStatus::Expanded, None) => {
                    return Err(SnapshotError::Inconsistent(format!("expanded state {} has no closure", s.id)))
                }
            };
            states.push(State {
                id: s.id,
                kernel: s.kernel.clone(),
                expansion,
            });
        }
        Fsa::from_parts(states, self.next_id, version).map_err(SnapshotError::Inconsistent)
    }
}

pub fn save(fsa: &Fsa, g: &Grammar) -> String {
    Snapshot::capture(fsa, g).to_json()
}

pub fn load(text: &str, g: &Grammar, force_rekernel: bool) -> Result<Fsa, SnapshotError> {
    Snapshot::from_json(text)?.restore(g, force_rekernel)
}
