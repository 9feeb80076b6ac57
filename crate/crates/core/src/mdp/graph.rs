//! Qualitative until analysis by graph fixpoints.
//!
//! Target states count as absorbing success, states that are neither safe
//! nor target as absorbing failure. Only the remaining "open" states have
//! their moves inspected.

use super::{Extremum, Mdp, StateSet};
use crate::model::StateId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prob01 {
    /// Extremal probability exactly 0.
    pub zero: StateSet,
    /// Extremal probability exactly 1.
    pub one: StateSet,
    /// A move realizing the qualitative value on `zero` (min) or `one` (max).
    pub(super) policy: Vec<Option<usize>>,
}

fn open(safe: &StateSet, target: &StateSet, s: usize) -> bool {
    safe[s] && !target[s]
}

/// Reverse edges from open states: `pred[t]` lists `(s, move)` with `t` in the support.
fn predecessors(mdp: &Mdp, safe: &StateSet, target: &StateSet) -> Vec<Vec<(usize, usize)>> {
    let mut pred = vec![Vec::new(); mdp.num_states()];
    for s in 0..mdp.num_states() {
        if !open(safe, target, s) {
            continue;
        }
        for (i, m) in mdp.moves(StateId(s)).iter().enumerate() {
            for t in m.dist.support() {
                pred[t.0].push((s, i));
            }
        }
    }
    pred
}

/// Open states that can reach `from` with positive probability under some choice.
fn backward_reach(pred: &[Vec<(usize, usize)>], from: &StateSet) -> StateSet {
    let mut seen = from.clone();
    let mut stack: Vec<usize> = (0..from.len()).filter(|&s| from[s]).collect();
    while let Some(t) = stack.pop() {
        for &(s, _) in &pred[t] {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

/// States where every policy gives positive probability, with no arithmetic.
fn all_moves_positive(mdp: &Mdp, safe: &StateSet, target: &StateSet) -> StateSet {
    let n = mdp.num_states();
    let mut r = target.clone();
    loop {
        let mut grew = false;
        for s in 0..n {
            if r[s] || !open(safe, target, s) {
                continue;
            }
            if mdp
                .moves(StateId(s))
                .iter()
                .all(|m| m.dist.support().any(|t| r[t.0]))
            {
                r[s] = true;
                grew = true;
            }
        }
        if !grew {
            return r;
        }
    }
}

/// Largest set from which some policy reaches `target` almost surely, with
/// the layer move that realizes it.
fn almost_sure_exists(mdp: &Mdp, safe: &StateSet, target: &StateSet) -> (StateSet, Vec<Option<usize>>) {
    let n = mdp.num_states();
    let mut u = vec![true; n];
    loop {
        let mut r = target.clone();
        let mut policy = vec![None; n];
        loop {
            let mut grew = false;
            for s in 0..n {
                if r[s] || !u[s] || !open(safe, target, s) {
                    continue;
                }
                let pick = mdp.moves(StateId(s)).iter().position(|m| {
                    m.dist.support().all(|t| u[t.0]) && m.dist.support().any(|t| r[t.0])
                });
                if let Some(i) = pick {
                    r[s] = true;
                    policy[s] = Some(i);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        if r == u {
            return (r, policy);
        }
        u = r;
    }
}

/// States with extremal `(safe U target)` probability exactly 0 and exactly 1.
pub fn prob01(mdp: &Mdp, safe: &StateSet, target: &StateSet, mode: Extremum) -> Prob01 {
    let n = mdp.num_states();
    let pred = predecessors(mdp, safe, target);
    match mode {
        Extremum::Max => {
            let reach = backward_reach(&pred, target);
            let (one, policy) = almost_sure_exists(mdp, safe, target);
            Prob01 {
                zero: reach.iter().map(|r| !r).collect(),
                one,
                policy,
            }
        }
        Extremum::Min => {
            let positive = all_moves_positive(mdp, safe, target);
            let zero: StateSet = positive.iter().map(|r| !r).collect();
            let escape = backward_reach(&pred, &zero);
            let one = escape.iter().map(|e| !e).collect();
            let policy = (0..n)
                .map(|s| {
                    if zero[s] && open(safe, target, s) {
                        mdp.moves(StateId(s))
                            .iter()
                            .position(|m| m.dist.support().all(|t| !positive[t.0]))
                    } else {
                        None
                    }
                })
                .collect();
            Prob01 { zero, one, policy }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Distribution;
    use crate::rational::Rational;

    fn d(s: usize) -> Distribution<StateId> {
        Distribution::dirac(StateId(s))
    }

    /// 0: choose between target (1) and fail (2). 1, 2 absorbing.
    fn fork() -> Mdp {
        Mdp::new(vec![vec![d(1), d(2)], vec![d(1)], vec![d(2)]])
    }

    #[test]
    fn everything_is_target() {
        let m = fork();
        let all = vec![true; 3];
        for mode in [Extremum::Min, Extremum::Max] {
            let p = prob01(&m, &all, &all, mode);
            assert_eq!(p.one, all);
            assert_eq!(p.zero, vec![false; 3]);
        }
    }

    #[test]
    fn unreachable_target() {
        let m = Mdp::new(vec![vec![d(0), d(1)], vec![d(1)], vec![d(2)]]);
        let safe = vec![true; 3];
        let target = vec![false, false, true];
        for mode in [Extremum::Min, Extremum::Max] {
            assert!(prob01(&m, &safe, &target, mode).zero[0]);
        }
    }

    #[test]
    fn adversary_extremes() {
        let m = fork();
        let safe = vec![true, false, false];
        let target = vec![false, true, false];
        let min = prob01(&m, &safe, &target, Extremum::Min);
        assert!(min.zero[0] && !min.one[0]);
        assert_eq!(min.policy[0], Some(1));
        let max = prob01(&m, &safe, &target, Extremum::Max);
        assert!(max.one[0] && !max.zero[0]);
        assert_eq!(max.policy[0], Some(0));
    }

    #[test]
    fn self_loop_blocks_min_but_not_max() {
        // 0 can loop forever or move to target 1.
        let m = Mdp::new(vec![vec![d(0), d(1)], vec![d(1)]]);
        let safe = vec![true, true];
        let target = vec![false, true];
        assert!(prob01(&m, &safe, &target, Extremum::Min).zero[0]);
        assert!(prob01(&m, &safe, &target, Extremum::Max).one[0]);
    }

    #[test]
    fn coin_loop_is_almost_sure() {
        let half = Rational::new(1, 2);
        let coin = Distribution::new([(StateId(0), half.clone()), (StateId(1), half)]).unwrap();
        let m = Mdp::new(vec![vec![coin], vec![d(1)]]);
        let safe = vec![true, true];
        let target = vec![false, true];
        for mode in [Extremum::Min, Extremum::Max] {
            assert!(prob01(&m, &safe, &target, mode).one[0]);
        }
    }

    #[test]
    fn risky_loop_is_not_almost_sure() {
        // 0 -> {0: 1/3, 1: 1/3, 2: 1/3}; 2 is a dead end.
        let third = Rational::new(1, 3);
        let row = Distribution::new([(StateId(0), third.clone()), (StateId(1), third.clone()), (StateId(2), third)]).unwrap();
        let m = Mdp::new(vec![vec![row], vec![d(1)], vec![d(2)]]);
        let safe = vec![true, true, false];
        let target = vec![false, true, false];
        let p = prob01(&m, &safe, &target, Extremum::Max);
        assert!(!p.one[0] && !p.zero[0]);
        assert!(p.zero[2]);
    }
}
