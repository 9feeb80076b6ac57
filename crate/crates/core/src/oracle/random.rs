//! Random instances for cross-checking. Probabilities come from a small
//! fixed palette so that exact solves stay cheap and failures replay.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::{Coalition, Comparison, Formula};
use crate::mdp::Mdp;
use crate::model::{Cgs, Distribution, ProbLiteral, RawModel, RawState, RawTransition, StateId};
use crate::rational::Rational;

/// Probability vectors built from {1/4, 1/3, 1/2, 2/3, 3/4, 1}.
const SUPPORTS: &[&[(i64, i64)]] = &[
    &[(1, 1)],
    &[(1, 2), (1, 2)],
    &[(1, 4), (3, 4)],
    &[(1, 3), (2, 3)],
    &[(1, 3), (1, 3), (1, 3)],
    &[(1, 4), (1, 4), (1, 2)],
];

/// Thresholds for random modalities.
const THRESHOLDS: &[(i64, i64)] = &[(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (1, 1)];

#[derive(Clone, Debug)]
pub struct RandomCgsParams {
    pub max_states: usize,
    pub agents: usize,
    pub max_actions: usize,
    pub atoms: usize,
    /// Only point distributions.
    pub dirac: bool,
}

impl Default for RandomCgsParams {
    fn default() -> Self {
        RandomCgsParams {
            max_states: 5,
            agents: 2,
            max_actions: 2,
            atoms: 2,
            dirac: false,
        }
    }
}

/// Picks a palette distribution over distinct outcomes drawn from `pool`.
fn palette_dist<T: Clone + Ord, R: Rng>(rng: &mut R, pool: &[T], dirac: bool) -> Vec<(T, Rational)> {
    let shapes: Vec<&&[(i64, i64)]> = SUPPORTS
        .iter()
        .filter(|s| s.len() <= pool.len() && (!dirac || s.len() == 1))
        .collect();
    let shape = **shapes.choose(rng).expect("the point distribution always fits");
    let picked: Vec<&T> = pool.choose_multiple(rng, shape.len()).collect();
    picked
        .into_iter()
        .zip(shape)
        .map(|(t, (n, d))| (t.clone(), Rational::new(*n, *d)))
        .collect()
}

fn random_partition<R: Rng>(rng: &mut R, states: &[String]) -> Vec<Vec<String>> {
    let k = rng.gen_range(1..=states.len());
    let mut classes: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for s in states {
        classes.entry(rng.gen_range(0..k)).or_default().push(s.clone());
    }
    classes.into_values().collect()
}

/// A valid random game structure as raw JSON data.
pub fn random_raw_cgs<R: Rng>(rng: &mut R, p: &RandomCgsParams) -> RawModel {
    let n = rng.gen_range(1..=p.max_states);
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let agents: Vec<String> = (0..p.agents).map(|i| format!("a{}", i + 1)).collect();
    let actions: Vec<String> = (0..p.max_actions).map(|i| format!("c{i}")).collect();
    let atoms: Vec<String> = ["p", "q", "r", "u", "v"].iter().take(p.atoms).map(|s| s.to_string()).collect();

    let mut legality: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    let mut observation = BTreeMap::new();
    for a in &agents {
        let classes = random_partition(rng, &states);
        for class in &classes {
            let k = rng.gen_range(1..=actions.len());
            let mut legal: Vec<String> = actions.choose_multiple(rng, k).cloned().collect();
            legal.sort();
            for s in class {
                legality.entry(s.clone()).or_default().insert(a.clone(), legal.clone());
            }
        }
        observation.insert(a.clone(), classes);
    }

    let mut transitions = Vec::new();
    for s in &states {
        let options: Vec<Vec<String>> = agents.iter().map(|a| legality[s][a].clone()).collect();
        let refs: Vec<&[String]> = options.iter().map(Vec::as_slice).collect();
        for joint in crate::model::cartesian(&refs) {
            let dist = palette_dist(rng, &states, p.dirac)
                .into_iter()
                .map(|(t, q)| (t, ProbLiteral::text(q.to_fraction_string())))
                .collect();
            transitions.push(RawTransition {
                state: s.clone(),
                action: agents.iter().cloned().zip(joint).collect(),
                dist,
            });
        }
    }

    let raw_states = states
        .iter()
        .map(|s| RawState {
            id: s.clone(),
            atoms: atoms.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect(),
        })
        .collect();
    RawModel {
        agents,
        actions,
        atoms,
        states: raw_states,
        legality,
        observation,
        transitions,
    }
}

pub fn random_cgs<R: Rng>(rng: &mut R, p: &RandomCgsParams) -> Cgs {
    Cgs::from_raw(&random_raw_cgs(rng, p)).expect("generator emits valid models")
}

/// Random MDP with palette distributions and `1..=max_moves` moves per state.
pub fn random_mdp<R: Rng>(rng: &mut R, states: usize, max_moves: usize) -> Mdp {
    let pool: Vec<StateId> = (0..states).map(StateId).collect();
    Mdp::new(
        (0..states)
            .map(|_| {
                (0..rng.gen_range(1..=max_moves))
                    .map(|_| Distribution::new(palette_dist(rng, &pool, false)).expect("palette sums to 1"))
                    .collect()
            })
            .collect(),
    )
}

#[derive(Clone, Debug)]
pub struct FormulaParams {
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    pub max_depth: usize,
    /// Restrict to `<<C>>{>=1}` modalities, no dual.
    pub qualitative: bool,
}

fn leaf<R: Rng>(rng: &mut R, p: &FormulaParams) -> Formula {
    if p.atoms.is_empty() || rng.gen_ratio(1, 8) {
        return Formula::True;
    }
    let a = Formula::atom(p.atoms.choose(rng).unwrap().clone());
    if rng.gen_ratio(1, 4) {
        a.not()
    } else {
        a
    }
}

fn coalition<R: Rng>(rng: &mut R, p: &FormulaParams) -> Coalition {
    if rng.gen_ratio(1, 6) {
        return Coalition::Grand;
    }
    Coalition::of(p.agents.iter().filter(|_| rng.gen_bool(0.5)).cloned())
}

fn state<R: Rng>(rng: &mut R, p: &FormulaParams, depth: usize, budget: usize) -> Formula {
    if budget == 0 {
        return leaf(rng, p);
    }
    match rng.gen_range(0..10) {
        0..=1 => leaf(rng, p),
        2 => state(rng, p, depth, budget - 1).not(),
        3 => {
            let (a, b) = (state(rng, p, depth, budget / 2), state(rng, p, depth, budget / 2));
            match rng.gen_range(0..3) {
                0 => a.or(b),
                1 => a.and(b),
                _ => a.implies(b),
            }
        }
        _ if depth > 0 => modality(rng, p, depth),
        _ => leaf(rng, p),
    }
}

fn modality<R: Rng>(rng: &mut R, p: &FormulaParams, depth: usize) -> Formula {
    let first = state(rng, p, depth - 1, 2);
    let path = match rng.gen_range(0..4) {
        0 => first.next(),
        1 => first.until(state(rng, p, depth - 1, 2)),
        2 => first.eventually(),
        _ => first.always(),
    };
    let c = coalition(rng, p);
    if p.qualitative {
        return Formula::strategic(c, Comparison::Ge, Rational::one(), path);
    }
    let cmp = *[Comparison::Le, Comparison::Lt, Comparison::Gt, Comparison::Ge].choose(rng).unwrap();
    let (n, d) = *THRESHOLDS.choose(rng).unwrap();
    let threshold = Rational::new(n, d);
    if rng.gen_ratio(1, 5) {
        Formula::dual(c, cmp, threshold, path)
    } else {
        Formula::strategic(c, cmp, threshold, path)
    }
}

/// A random formula that is PATL after desugaring, with modality depth at
/// most `max_depth` and at least one modality when `max_depth > 0`.
pub fn random_patl_formula<R: Rng>(rng: &mut R, p: &FormulaParams) -> Formula {
    if p.max_depth == 0 {
        return state(rng, p, 0, 3);
    }
    let depth = rng.gen_range(1..=p.max_depth);
    let m = modality(rng, p, depth);
    match rng.gen_range(0..4) {
        0 => m.not(),
        1 => m.or(leaf(rng, p)),
        _ => m,
    }
}
