//! Uniform memoryless strategies and their enumeration.
//!
//! A deterministic uniform strategy picks one action per observation class.
//! The space of coalition assignments is a mixed-radix number whose digits
//! are `(agent, class)` slots in lexicographic order, the last slot varying
//! fastest, so any index can be decoded directly. This lets the checker
//! split enumeration into disjoint index ranges.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::model::{ActionId, AgentId, Cgs, ClassId, Distribution, StateId};

/// Deterministic uniform memoryless strategy: one action per observation class.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UniformStrategy {
    pub agent: AgentId,
    /// Indexed by [`ClassId`].
    pub choice: Vec<ActionId>,
}

impl UniformStrategy {
    pub fn action_at(&self, cgs: &Cgs, s: StateId) -> ActionId {
        self.choice[cgs.obs_class(self.agent, s).0]
    }

    /// The strategy as a state-indexed family of point distributions.
    pub fn to_probabilistic(&self, cgs: &Cgs) -> MemorylessStrategy {
        MemorylessStrategy {
            agent: self.agent,
            choice: cgs.states().map(|s| Distribution::dirac(self.action_at(cgs, s))).collect(),
        }
    }
}

/// Probabilistic memoryless strategy, possibly non-uniform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorylessStrategy {
    pub agent: AgentId,
    /// Indexed by [`StateId`].
    pub choice: Vec<Distribution<ActionId>>,
}

impl MemorylessStrategy {
    /// Every action with positive probability is legal where it is played.
    pub fn respects_legality(&self, cgs: &Cgs) -> bool {
        self.choice.len() == cgs.num_states()
            && cgs
                .states()
                .all(|s| self.choice[s.0].support().all(|c| cgs.legal(s, self.agent).contains(c)))
    }
}

/// True iff the strategy prescribes identical distributions on states the
/// agent cannot tell apart.
pub fn is_uniform(cgs: &Cgs, strategy: &MemorylessStrategy) -> bool {
    cgs.partition(strategy.agent).classes().iter().all(|class| {
        let first = &strategy.choice[class[0].0];
        class[1..].iter().all(|s| strategy.choice[s.0] == *first)
    })
}

/// One uniform strategy per coalition member, ordered by agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoalitionAssignment {
    pub strategies: Vec<UniformStrategy>,
}

impl CoalitionAssignment {
    pub fn strategy(&self, agent: AgentId) -> Option<&UniformStrategy> {
        self.strategies.iter().find(|s| s.agent == agent)
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.strategies.iter().map(|s| s.agent)
    }

    /// `{agent: {class representative state: action}}`.
    pub fn to_witness(&self, cgs: &Cgs) -> Witness {
        self.strategies
            .iter()
            .map(|st| {
                let part = cgs.partition(st.agent);
                let per_class = st
                    .choice
                    .iter()
                    .enumerate()
                    .map(|(k, c)| {
                        let rep = part.representative(ClassId(k));
                        (cgs.state_name(rep).to_string(), cgs.action_name(*c).to_string())
                    })
                    .collect();
                (cgs.agent_name(st.agent).to_string(), per_class)
            })
            .collect()
    }
}

/// Serialized witness form.
pub type Witness = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Clone, Debug)]
struct Slot {
    options: Vec<ActionId>,
}

/// The uniform deterministic strategy space of a coalition.
#[derive(Clone, Debug)]
pub struct StrategySpace {
    coalition: Vec<AgentId>,
    classes_per_agent: Vec<usize>,
    slots: Vec<Slot>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpaceSummary {
    pub agents: Vec<String>,
    pub classes: Vec<usize>,
    pub count: String,
}

impl StrategySpace {
    /// `coalition` may be unsorted or contain repeats.
    pub fn new(cgs: &Cgs, coalition: &[AgentId]) -> Self {
        let mut members = coalition.to_vec();
        members.sort();
        members.dedup();
        let mut slots = Vec::new();
        let mut classes_per_agent = Vec::new();
        for &a in &members {
            let n = cgs.partition(a).len();
            classes_per_agent.push(n);
            for k in 0..n {
                slots.push(Slot {
                    options: cgs.class_legal(a, ClassId(k)).to_vec(),
                });
            }
        }
        StrategySpace {
            coalition: members,
            classes_per_agent,
            slots,
        }
    }

    pub fn coalition(&self) -> &[AgentId] {
        &self.coalition
    }

    /// Number of assignments: the product of class-wise legal action counts.
    pub fn count(&self) -> BigUint {
        self.slots
            .iter()
            .fold(BigUint::one(), |acc, s| acc * BigUint::from(s.options.len()))
    }

    pub fn count_u64(&self) -> Option<u64> {
        self.count().to_u64()
    }

    pub fn summary(&self, cgs: &Cgs) -> SpaceSummary {
        SpaceSummary {
            agents: self.coalition.iter().map(|a| cgs.agent_name(*a).to_string()).collect(),
            classes: self.classes_per_agent.clone(),
            count: self.count().to_string(),
        }
    }

    fn assemble(&self, digits: &[usize]) -> CoalitionAssignment {
        let mut strategies = Vec::with_capacity(self.coalition.len());
        let mut pos = 0;
        for (&agent, &n) in self.coalition.iter().zip(&self.classes_per_agent) {
            let choice = (0..n)
                .map(|k| self.slots[pos + k].options[digits[pos + k]])
                .collect();
            strategies.push(UniformStrategy { agent, choice });
            pos += n;
        }
        CoalitionAssignment { strategies }
    }

    /// The assignment at position `index` of the enumeration order.
    pub fn at(&self, index: u64) -> Option<CoalitionAssignment> {
        if BigUint::from(index) >= self.count() {
            return None;
        }
        let mut digits = vec![0; self.slots.len()];
        let mut rest = index;
        for (i, slot) in self.slots.iter().enumerate().rev() {
            let radix = slot.options.len() as u64;
            digits[i] = (rest % radix) as usize;
            rest /= radix;
        }
        Some(self.assemble(&digits))
    }

    pub fn iter(&self) -> StrategyIter<'_> {
        StrategyIter {
            space: self,
            digits: Some(vec![0; self.slots.len()]),
        }
    }
}

/// Odometer over a [`StrategySpace`].
pub struct StrategyIter<'a> {
    space: &'a StrategySpace,
    digits: Option<Vec<usize>>,
}

impl Iterator for StrategyIter<'_> {
    type Item = CoalitionAssignment;

    fn next(&mut self) -> Option<CoalitionAssignment> {
        let digits = self.digits.as_mut()?;
        let out = self.space.assemble(digits);
        let mut i = digits.len();
        loop {
            if i == 0 {
                self.digits = None;
                break;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < self.space.slots[i].options.len() {
                break;
            }
            digits[i] = 0;
        }
        Some(out)
    }
}

pub fn strategy_count(cgs: &Cgs, coalition: &[AgentId]) -> BigUint {
    StrategySpace::new(cgs, coalition).count()
}

/// All coalition assignments in lexicographic `(agent, class, action)` order.
pub fn enumerate_uniform_strategies(cgs: &Cgs, coalition: &[AgentId]) -> Vec<CoalitionAssignment> {
    StrategySpace::new(cgs, coalition).iter().collect()
}
