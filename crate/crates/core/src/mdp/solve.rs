use std::collections::BTreeMap;

use serde::Serialize;

use super::{linalg::solve_sparse, prob01, Extremum, Mdp, StateSet};
use crate::model::{Distribution, StateId};
use crate::rational::Rational;

/// Extremal values with a memoryless deterministic adversary policy
/// (move index per state) attaining them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MdpSolution {
    pub values: Vec<Rational>,
    pub policy: Vec<usize>,
}

fn expectation(dist: &Distribution<StateId>, values: &[Rational]) -> Rational {
    dist.iter().map(|(t, p)| p * &values[t.0]).sum()
}

fn better(mode: Extremum, a: &Rational, b: &Rational) -> bool {
    match mode {
        Extremum::Max => a > b,
        Extremum::Min => a < b,
    }
}

/// Solves the chain given by one row per state. States with a `fixed` value
/// keep it; free states that cannot reach a positively valued fixed state get
/// 0; the rest come from one exact linear solve.
fn solve_chain(rows: &[&Distribution<StateId>], fixed: &[Option<Rational>]) -> Vec<Rational> {
    let n = rows.len();
    let mut pred = vec![Vec::new(); n];
    for s in 0..n {
        if fixed[s].is_none() {
            for t in rows[s].support() {
                pred[t.0].push(s);
            }
        }
    }
    let mut live = vec![false; n];
    let mut stack: Vec<usize> = (0..n)
        .filter(|&s| fixed[s].as_ref().is_some_and(Rational::is_positive))
        .collect();
    for &s in &stack {
        live[s] = true;
    }
    while let Some(t) = stack.pop() {
        for &s in &pred[t] {
            if !live[s] {
                live[s] = true;
                stack.push(s);
            }
        }
    }

    let free: Vec<usize> = (0..n).filter(|&s| fixed[s].is_none() && live[s]).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &s) in free.iter().enumerate() {
        slot[s] = i;
    }
    let mut a = Vec::with_capacity(free.len());
    let mut b = Vec::with_capacity(free.len());
    for &s in &free {
        let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
        row.insert(slot[s], Rational::one());
        let mut rhs = Rational::zero();
        for (t, p) in rows[s].iter() {
            if let Some(v) = &fixed[t.0] {
                rhs += p * v;
            } else if live[t.0] {
                let e = row.entry(slot[t.0]).or_default();
                *e = &*e - p;
            }
        }
        row.retain(|_, v| !v.is_zero());
        a.push(row);
        b.push(rhs);
    }
    let x = solve_sparse(a, b).expect("transient part of a chain is nonsingular");
    (0..n)
        .map(|s| match &fixed[s] {
            Some(v) => v.clone(),
            None if live[s] => x[slot[s]].clone(),
            None => Rational::zero(),
        })
        .collect()
}

fn until_fixed(safe: &StateSet, target: &StateSet) -> Vec<Option<Rational>> {
    (0..safe.len())
        .map(|s| {
            if target[s] {
                Some(Rational::one())
            } else if !safe[s] {
                Some(Rational::zero())
            } else {
                None
            }
        })
        .collect()
}

/// `(safe U target)` probabilities under a fixed adversary policy.
pub fn evaluate_policy(mdp: &Mdp, safe: &StateSet, target: &StateSet, policy: &[usize]) -> Vec<Rational> {
    let rows: Vec<&Distribution<StateId>> = mdp.states().map(|s| &mdp.moves(s)[policy[s.0]].dist).collect();
    solve_chain(&rows, &until_fixed(safe, target))
}

/// Exact extremal `(safe U target)` probability per state.
///
/// Qualitative sets come from [`prob01`]; the remaining states are solved by
/// policy iteration. A state switches only to a strictly better move, the
/// best one, lowest index among equals.
pub fn extremal_until(mdp: &Mdp, safe: &StateSet, target: &StateSet, mode: Extremum) -> MdpSolution {
    let n = mdp.num_states();
    let q = prob01(mdp, safe, target, mode);
    let mut fixed = until_fixed(safe, target);
    for s in 0..n {
        if fixed[s].is_none() {
            if q.zero[s] {
                fixed[s] = Some(Rational::zero());
            } else if q.one[s] {
                fixed[s] = Some(Rational::one());
            }
        }
    }
    let mut policy: Vec<usize> = q.policy.iter().map(|p| p.unwrap_or(0)).collect();
    let unknown: Vec<usize> = (0..n).filter(|&s| fixed[s].is_none()).collect();
    loop {
        let rows: Vec<&Distribution<StateId>> = mdp.states().map(|s| &mdp.moves(s)[policy[s.0]].dist).collect();
        let values = solve_chain(&rows, &fixed);
        let mut changed = false;
        for &s in &unknown {
            let mut best = values[s].clone();
            let mut pick = None;
            for (i, m) in mdp.moves(StateId(s)).iter().enumerate() {
                let v = expectation(&m.dist, &values);
                if better(mode, &v, &best) {
                    best = v;
                    pick = Some(i);
                }
            }
            if let Some(i) = pick {
                policy[s] = i;
                changed = true;
            }
        }
        if !changed {
            return MdpSolution { values, policy };
        }
    }
}

/// Extremal one-step probability of landing in `target`.
pub fn extremal_next(mdp: &Mdp, target: &StateSet, mode: Extremum) -> MdpSolution {
    let mut values = Vec::with_capacity(mdp.num_states());
    let mut policy = Vec::with_capacity(mdp.num_states());
    for s in mdp.states() {
        let mut best: Option<(usize, Rational)> = None;
        for (i, m) in mdp.moves(s).iter().enumerate() {
            let v = m.dist.mass(|t| target[t.0]);
            if best.as_ref().is_none_or(|(_, b)| better(mode, &v, b)) {
                best = Some((i, v));
            }
        }
        let (i, v) = best.expect("every state has a move");
        policy.push(i);
        values.push(v);
    }
    MdpSolution { values, policy }
}
