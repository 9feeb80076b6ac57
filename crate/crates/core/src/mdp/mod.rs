//! The single-adversary MDP left after fixing a coalition assignment, and
//! exact extremal probabilities for next and until objectives on it.

mod graph;
mod linalg;
mod solve;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{ActionId, AgentId, Cgs, Distribution, JointAction, StateId};
use crate::rational::Rational;
use crate::strategy::CoalitionAssignment;

pub use crate::logic::Extremum;
pub use graph::{prob01, Prob01};
pub use linalg::solve_sparse;
pub use solve::{evaluate_policy, extremal_next, extremal_until, MdpSolution};

/// A membership vector over the states of a model.
pub type StateSet = Vec<bool>;

/// One adversary move: the opponents' actions (ordered by agent) and the
/// resulting successor distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub label: Vec<ActionId>,
    pub dist: Distribution<StateId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdp {
    /// Agents merged into the adversary; `Move::label` follows this order.
    opponents: Vec<AgentId>,
    moves: Vec<Vec<Move>>,
}

impl Mdp {
    /// Builds an MDP from explicit move lists. Panics if a state has no move.
    pub fn new(moves: Vec<Vec<Distribution<StateId>>>) -> Mdp {
        assert!(moves.iter().all(|m| !m.is_empty()), "every state needs a move");
        let moves = moves
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .enumerate()
                    .map(|(i, dist)| Move {
                        label: vec![ActionId(i)],
                        dist,
                    })
                    .collect()
            })
            .collect();
        Mdp {
            opponents: vec![AgentId(0)],
            moves,
        }
    }

    pub fn num_states(&self) -> usize {
        self.moves.len()
    }

    pub fn moves(&self, s: StateId) -> &[Move] {
        &self.moves[s.0]
    }

    pub fn opponents(&self) -> &[AgentId] {
        &self.opponents
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.moves.len()).map(StateId)
    }

    /// True when each state has exactly one move.
    pub fn is_chain(&self) -> bool {
        self.moves.iter().all(|m| m.len() == 1)
    }

    /// JSON-friendly view, optionally with a value vector.
    pub fn dump(&self, cgs: &Cgs, values: Option<&[Rational]>) -> MdpDump {
        let states = self
            .states()
            .map(|s| DumpState {
                state: cgs.state_name(s).to_string(),
                value: values.map(|v| v[s.0].to_fraction_string()),
                moves: self.moves[s.0]
                    .iter()
                    .map(|m| DumpMove {
                        opponents: self
                            .opponents
                            .iter()
                            .zip(&m.label)
                            .map(|(a, c)| (cgs.agent_name(*a).to_string(), cgs.action_name(*c).to_string()))
                            .collect(),
                        dist: m
                            .dist
                            .iter()
                            .map(|(t, p)| (cgs.state_name(*t).to_string(), p.to_fraction_string()))
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        MdpDump {
            opponents: self.opponents.iter().map(|a| cgs.agent_name(*a).to_string()).collect(),
            states,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MdpDump {
    pub opponents: Vec<String>,
    pub states: Vec<DumpState>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpState {
    pub state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub moves: Vec<DumpMove>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DumpMove {
    pub opponents: BTreeMap<String, String>,
    pub dist: BTreeMap<String, String>,
}

/// Fixes the coalition's actions and merges everyone else into one adversary.
///
/// Moves at each state are the opponents' legal joint actions in
/// lexicographic order.
pub fn induce_mdp(cgs: &Cgs, assignment: &CoalitionAssignment) -> Mdp {
    let mut fixed: Vec<Option<&crate::strategy::UniformStrategy>> = vec![None; cgs.num_agents()];
    for st in &assignment.strategies {
        fixed[st.agent.0] = Some(st);
    }
    let opponents: Vec<AgentId> = cgs.agents().filter(|a| fixed[a.0].is_none()).collect();
    let moves = cgs
        .states()
        .map(|s| {
            let pinned: Vec<Option<ActionId>> = fixed.iter().map(|f| f.map(|st| st.action_at(cgs, s))).collect();
            cgs.transitions(s)
                .iter()
                .filter(|(ja, _)| matches(ja, &pinned))
                .map(|(ja, dist)| Move {
                    label: opponents.iter().map(|a| ja.get(*a)).collect(),
                    dist: dist.clone(),
                })
                .collect()
        })
        .collect();
    Mdp { opponents, moves }
}

fn matches(ja: &JointAction, pinned: &[Option<ActionId>]) -> bool {
    ja.0.iter().zip(pinned).all(|(c, p)| p.is_none_or(|p| p == *c))
}
