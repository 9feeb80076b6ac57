//! Ground truth by exhaustive enumeration: every uniform coalition assignment
//! against every memoryless deterministic adversary policy, each pair solved
//! as a Markov chain.

use super::chain::{chain_next_probability, chain_until_probability, MarkovChain};
use super::OracleError;
use crate::logic::{desugar, to_patl, Coalition, Formula, PathObjective, PatlModality, StateFormula};
use crate::model::{ActionId, AgentId, Cgs, JointAction, StateId};
use crate::rational::Rational;

/// Default bound on coalition-assignment × adversary-policy combinations
/// per strategic subformula.
pub const DEFAULT_LIMIT: u64 = 100_000;

/// Mixed-radix counter over `radices`, last digit fastest.
pub(super) struct Odometer {
    radices: Vec<usize>,
    digits: Option<Vec<usize>>,
}

impl Odometer {
    pub(super) fn new(radices: Vec<usize>) -> Self {
        let digits = radices.iter().all(|&r| r > 0).then(|| vec![0; radices.len()]);
        Odometer { radices, digits }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.digits.clone()?;
        let d = self.digits.as_mut().unwrap();
        let mut i = d.len();
        loop {
            if i == 0 {
                self.digits = None;
                break;
            }
            i -= 1;
            d[i] += 1;
            if d[i] < self.radices[i] {
                break;
            }
            d[i] = 0;
        }
        Some(cur)
    }
}

pub(super) fn resolve_agents(cgs: &Cgs, c: &Coalition) -> Result<Vec<bool>, OracleError> {
    let mut member = vec![false; cgs.num_agents()];
    match c {
        Coalition::Grand => member.iter_mut().for_each(|m| *m = true),
        Coalition::Agents(names) => {
            for n in names {
                let a = cgs.agent_id(n).map_err(|_| OracleError::Binding(n.clone()))?;
                member[a.0] = true;
            }
        }
    }
    Ok(member)
}

/// All uniform coalition choices as `[state][agent] -> Some(action)` for
/// members, `None` for opponents.
pub(super) fn coalition_choices(cgs: &Cgs, member: &[bool]) -> Vec<Vec<Vec<Option<ActionId>>>> {
    let mut slots: Vec<(usize, Vec<StateId>, Vec<ActionId>)> = Vec::new();
    for a in 0..cgs.num_agents() {
        if !member[a] {
            continue;
        }
        for class in cgs.partition(AgentId(a)).classes() {
            let options = cgs.legal(class[0], AgentId(a)).to_vec();
            slots.push((a, class.clone(), options));
        }
    }
    Odometer::new(slots.iter().map(|s| s.2.len()).collect())
        .map(|digits| {
            let mut pick = vec![vec![None; cgs.num_agents()]; cgs.num_states()];
            for ((a, class, options), d) in slots.iter().zip(digits) {
                for s in class {
                    pick[s.0][*a] = Some(options[d]);
                }
            }
            pick
        })
        .collect()
}

/// Opponent completions of a partial joint action at `s`.
pub(super) fn completions(cgs: &Cgs, s: StateId, fixed: &[Option<ActionId>]) -> Vec<JointAction> {
    let radices: Vec<usize> = (0..cgs.num_agents())
        .map(|a| if fixed[a].is_some() { 1 } else { cgs.legal(s, AgentId(a)).len() })
        .collect();
    Odometer::new(radices)
        .map(|d| {
            JointAction(
                (0..cgs.num_agents())
                    .map(|a| fixed[a].unwrap_or_else(|| cgs.legal(s, AgentId(a))[d[a]]))
                    .collect(),
            )
        })
        .collect()
}

fn extremal_values(
    cgs: &Cgs,
    pick: &[Vec<Option<ActionId>>],
    m: &PatlModality,
    sets: &Sets,
) -> Vec<Rational> {
    let n = cgs.num_states();
    let options: Vec<Vec<JointAction>> = (0..n).map(|s| completions(cgs, StateId(s), &pick[s])).collect();
    let prefer_low = m.cmp.extremum() == crate::logic::Extremum::Min;
    let mut best: Vec<Option<Rational>> = vec![None; n];
    let mut offer = |s: usize, v: Rational| {
        let better = match &best[s] {
            None => true,
            Some(b) => (prefer_low && v < *b) || (!prefer_low && v > *b),
        };
        if better {
            best[s] = Some(v);
        }
    };
    match sets {
        Sets::Next(target) => {
            // A state's next-value depends only on its own move.
            for s in 0..n {
                for ja in &options[s] {
                    let row = cgs.successors(StateId(s), ja).expect("legal joint action");
                    let mc = single_row(n, s, row.clone());
                    offer(s, chain_next_probability(&mc, target)[s].clone());
                }
            }
        }
        Sets::Until(safe, target) => {
            let open: Vec<usize> = (0..n).filter(|&s| safe[s] && !target[s]).collect();
            let radices = open.iter().map(|&s| options[s].len()).collect();
            for d in Odometer::new(radices) {
                let mut choice = vec![0; n];
                for (k, &s) in open.iter().enumerate() {
                    choice[s] = d[k];
                }
                let rows = (0..n)
                    .map(|s| cgs.successors(StateId(s), &options[s][choice[s]]).expect("legal").clone())
                    .collect();
                let v = chain_until_probability(&MarkovChain::new(rows), safe, target);
                for (s, x) in v.into_iter().enumerate() {
                    offer(s, x);
                }
            }
        }
    }
    best.into_iter().map(|b| b.expect("at least one policy")).collect()
}

/// Chain where only row `s` matters; others are self-loops.
fn single_row(n: usize, s: usize, row: crate::model::Distribution<StateId>) -> MarkovChain {
    MarkovChain::new(
        (0..n)
            .map(|t| {
                if t == s {
                    row.clone()
                } else {
                    crate::model::Distribution::dirac(StateId(t))
                }
            })
            .collect(),
    )
}

enum Sets {
    Next(Vec<bool>),
    Until(Vec<bool>, Vec<bool>),
}

fn combinations(cgs: &Cgs, choices: &[Vec<Vec<Option<ActionId>>>], sets: &Sets) -> u128 {
    let n = cgs.num_states();
    choices
        .iter()
        .map(|pick| {
            let per_state = |s: usize| completions(cgs, StateId(s), &pick[s]).len() as u128;
            match sets {
                Sets::Next(_) => (0..n).map(per_state).sum::<u128>(),
                Sets::Until(safe, target) => (0..n)
                    .filter(|&s| safe[s] && !target[s])
                    .map(per_state)
                    .fold(1u128, |acc, k| acc.saturating_mul(k)),
            }
        })
        .fold(0u128, |acc, k| acc.saturating_add(k))
}

fn eval(cgs: &Cgs, f: &StateFormula, limit: u64) -> Result<Vec<bool>, OracleError> {
    let n = cgs.num_states();
    Ok(match f {
        StateFormula::True => vec![true; n],
        StateFormula::Atom(p) => {
            let id = cgs.atom_id(p).map_err(|_| OracleError::Binding(p.clone()))?;
            cgs.states().map(|s| cgs.has_atom(s, id)).collect()
        }
        StateFormula::Not(g) => eval(cgs, g, limit)?.into_iter().map(|b| !b).collect(),
        StateFormula::Or(a, b) => {
            let (x, y) = (eval(cgs, a, limit)?, eval(cgs, b, limit)?);
            x.into_iter().zip(y).map(|(p, q)| p || q).collect()
        }
        StateFormula::Strategic(m) => {
            let member = resolve_agents(cgs, &m.coalition)?;
            let sets = match &m.objective {
                PathObjective::Next(g) => Sets::Next(eval(cgs, g, limit)?),
                PathObjective::Until(a, b) => Sets::Until(eval(cgs, a, limit)?, eval(cgs, b, limit)?),
            };
            let choices = coalition_choices(cgs, &member);
            let combos = combinations(cgs, &choices, &sets);
            if combos > limit as u128 {
                return Err(OracleError::TooLarge {
                    combinations: combos.to_string(),
                    limit,
                });
            }
            let mut holds = vec![false; n];
            for pick in &choices {
                let values = extremal_values(cgs, pick, m, &sets);
                for s in 0..n {
                    holds[s] |= m.cmp.holds(&values[s], &m.threshold);
                }
            }
            holds
        }
    })
}

/// Per-state verdicts of a PATL formula by exhaustive enumeration.
///
/// Refuses (never truncates) when a strategic subformula needs more than
/// `limit` assignment × policy combinations.
pub fn brute_force_check(cgs: &Cgs, f: &Formula, limit: u64) -> Result<Vec<bool>, OracleError> {
    let sf = to_patl(&desugar(f))?;
    eval(cgs, &sf, limit)
}
