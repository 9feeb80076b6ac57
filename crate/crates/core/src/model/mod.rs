//! Stochastic concurrent game structures with imperfect information.

mod distribution;
pub mod raw;
mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

pub use distribution::{product_distribution, Distribution, DistributionError};
pub use raw::{ProbLiteral, RawModel, RawState, RawTransition};
pub use validate::{validate_cgs, Violation};

use crate::error::ModelError;

macro_rules! index_type {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            pub fn index(self) -> usize {
                self.0
            }
        }
    };
}

index_type!(StateId);
index_type!(AgentId);
index_type!(ActionId);
index_type!(AtomId);
index_type!(
    /// Index of an observation class within one agent's partition.
    ClassId
);

/// One action per agent, indexed by agent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct JointAction(pub Vec<ActionId>);

impl JointAction {
    pub fn get(&self, agent: AgentId) -> ActionId {
        self.0[agent.0]
    }
}

/// An agent's observation relation, stored as a partition of the states.
///
/// Classes are sorted by their smallest member and each class is sorted, so
/// class ids are canonical: under the identity partition the class of state
/// `i` is `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    class_of: Vec<ClassId>,
    classes: Vec<Vec<StateId>>,
}

impl Partition {
    pub fn identity(n: usize) -> Self {
        Partition {
            class_of: (0..n).map(ClassId).collect(),
            classes: (0..n).map(|i| vec![StateId(i)]).collect(),
        }
    }

    /// Caller guarantees `classes` is a partition of `0..n`.
    pub(crate) fn from_classes(n: usize, mut classes: Vec<Vec<StateId>>) -> Self {
        for c in &mut classes {
            c.sort();
        }
        classes.sort_by_key(|c| c[0]);
        let mut class_of = vec![ClassId(0); n];
        for (k, class) in classes.iter().enumerate() {
            for s in class {
                class_of[s.0] = ClassId(k);
            }
        }
        Partition { class_of, classes }
    }

    pub fn class_of(&self, s: StateId) -> ClassId {
        self.class_of[s.0]
    }

    pub fn classes(&self) -> &[Vec<StateId>] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Lowest-index member of class `k`.
    pub fn representative(&self, k: ClassId) -> StateId {
        self.classes[k.0][0]
    }
}

/// A validated game structure. Immutable once built.
#[derive(Clone, Debug)]
pub struct Cgs {
    agents: Vec<String>,
    actions: Vec<String>,
    atoms: Vec<String>,
    states: Vec<String>,
    agent_ix: HashMap<String, AgentId>,
    action_ix: HashMap<String, ActionId>,
    atom_ix: HashMap<String, AtomId>,
    state_ix: HashMap<String, StateId>,
    labels: Vec<BTreeSet<AtomId>>,
    /// `[state][agent]`, ascending action ids.
    legality: Vec<Vec<Vec<ActionId>>>,
    transitions: Vec<BTreeMap<JointAction, Distribution<StateId>>>,
    observation: Vec<Partition>,
}

impl Cgs {
    /// Validates and builds. All violations are returned on failure.
    pub fn from_raw(raw: &RawModel) -> Result<Cgs, ModelError> {
        validate::build(raw).map_err(ModelError::Invalid)
    }

    pub fn from_json(text: &str) -> Result<Cgs, ModelError> {
        Cgs::from_raw(&RawModel::from_json(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Cgs, ModelError> {
        Cgs::from_raw(&RawModel::load(path)?)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + Clone {
        (0..self.states.len()).map(StateId)
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + Clone {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn agent_name(&self, a: AgentId) -> &str {
        &self.agents[a.0]
    }

    pub fn action_name(&self, c: ActionId) -> &str {
        &self.actions[c.0]
    }

    pub fn atom_name(&self, p: AtomId) -> &str {
        &self.atoms[p.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn atom_names(&self) -> &[String] {
        &self.atoms
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        lookup(&self.state_ix, "state", name)
    }

    pub fn agent_id(&self, name: &str) -> Result<AgentId, ModelError> {
        lookup(&self.agent_ix, "agent", name)
    }

    pub fn action_id(&self, name: &str) -> Result<ActionId, ModelError> {
        lookup(&self.action_ix, "action", name)
    }

    pub fn atom_id(&self, name: &str) -> Result<AtomId, ModelError> {
        lookup(&self.atom_ix, "atom", name)
    }

    pub fn labels(&self, s: StateId) -> &BTreeSet<AtomId> {
        &self.labels[s.0]
    }

    pub fn has_atom(&self, s: StateId, p: AtomId) -> bool {
        self.labels[s.0].contains(&p)
    }

    pub fn legal(&self, s: StateId, a: AgentId) -> &[ActionId] {
        &self.legality[s.0][a.0]
    }

    pub fn partition(&self, a: AgentId) -> &Partition {
        &self.observation[a.0]
    }

    pub fn obs_class(&self, a: AgentId, s: StateId) -> ClassId {
        self.observation[a.0].class_of(s)
    }

    /// Legal actions of `a` throughout class `k` (identical across the class by uniformity).
    pub fn class_legal(&self, a: AgentId, k: ClassId) -> &[ActionId] {
        self.legal(self.observation[a.0].representative(k), a)
    }

    /// The transition table of state `s`, keyed by legal joint action.
    pub fn transitions(&self, s: StateId) -> &BTreeMap<JointAction, Distribution<StateId>> {
        &self.transitions[s.0]
    }

    /// `δ(s, ja)`; errors name the first agent whose action is illegal.
    pub fn successors(&self, s: StateId, ja: &JointAction) -> Result<&Distribution<StateId>, ModelError> {
        if ja.0.len() != self.agents.len() {
            return Err(ModelError::JointArity {
                got: ja.0.len(),
                expected: self.agents.len(),
            });
        }
        for (a, c) in ja.0.iter().enumerate() {
            if !self.legality[s.0][a].contains(c) {
                return Err(ModelError::IllegalAction {
                    state: self.states[s.0].clone(),
                    agent: self.agents[a].clone(),
                    action: self
                        .actions
                        .get(c.0)
                        .cloned()
                        .unwrap_or_else(|| format!("#{}", c.0)),
                });
            }
        }
        Ok(&self.transitions[s.0][ja])
    }

    /// True when every transition distribution is a point distribution.
    pub fn is_deterministic(&self) -> bool {
        self.transitions
            .iter()
            .all(|row| row.values().all(|d| d.as_dirac().is_some()))
    }

    /// Renders a joint action as `{agent=action,...}`.
    pub fn format_joint(&self, ja: &JointAction) -> String {
        let parts: Vec<String> = ja
            .0
            .iter()
            .enumerate()
            .map(|(a, c)| format!("{}={}", self.agents[a], self.actions[c.0]))
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Writes the structure back to its file form.
    pub fn to_raw(&self) -> RawModel {
        let states = self
            .states()
            .map(|s| RawState {
                id: self.states[s.0].clone(),
                atoms: self.labels[s.0].iter().map(|p| self.atoms[p.0].clone()).collect(),
            })
            .collect();
        let legality = self
            .states()
            .map(|s| {
                let per_agent = self
                    .agents()
                    .map(|a| {
                        let acts = self.legal(s, a).iter().map(|c| self.actions[c.0].clone()).collect();
                        (self.agents[a.0].clone(), acts)
                    })
                    .collect();
                (self.states[s.0].clone(), per_agent)
            })
            .collect();
        let observation = self
            .agents()
            .filter(|a| self.observation[a.0].len() != self.states.len())
            .map(|a| {
                let classes = self.observation[a.0]
                    .classes()
                    .iter()
                    .map(|c| c.iter().map(|s| self.states[s.0].clone()).collect())
                    .collect();
                (self.agents[a.0].clone(), classes)
            })
            .collect();
        let transitions = self
            .states()
            .flat_map(|s| {
                self.transitions[s.0].iter().map(move |(ja, dist)| RawTransition {
                    state: self.states[s.0].clone(),
                    action: ja
                        .0
                        .iter()
                        .enumerate()
                        .map(|(a, c)| (self.agents[a].clone(), self.actions[c.0].clone()))
                        .collect(),
                    dist: dist
                        .iter()
                        .map(|(t, p)| (self.states[t.0].clone(), ProbLiteral::Text(p.to_fraction_string())))
                        .collect(),
                })
            })
            .collect();
        RawModel {
            agents: self.agents.clone(),
            actions: self.actions.clone(),
            atoms: self.atoms.clone(),
            states,
            legality,
            observation,
            transitions,
        }
    }
}

fn lookup<T: Copy>(ix: &HashMap<String, T>, namespace: &'static str, name: &str) -> Result<T, ModelError> {
    ix.get(name).copied().ok_or_else(|| ModelError::Unknown {
        namespace,
        name: name.to_string(),
    })
}

/// All joint actions in the cartesian product of `choices`, lexicographic with
/// the last component varying fastest.
pub fn cartesian<T: Clone>(choices: &[&[T]]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for opts in choices {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for o in opts.iter() {
                let mut v = prefix.clone();
                v.push(o.clone());
                next.push(v);
            }
        }
        out = next;
    }
    out
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s#{}", self.0)
    }
}
