use serde::Serialize;

use super::OracleError;
use crate::model::{product_distribution, Cgs, Distribution, JointAction, StateId};
use crate::rational::Rational;
use crate::strategy::MemorylessStrategy;

/// Finite Markov chain over the states of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    rows: Vec<Distribution<StateId>>,
}

impl MarkovChain {
    pub fn new(rows: Vec<Distribution<StateId>>) -> Self {
        MarkovChain { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, s: StateId) -> &Distribution<StateId> {
        &self.rows[s.0]
    }

    pub fn rows(&self) -> &[Distribution<StateId>] {
        &self.rows
    }
}

/// A memoryless strategy for every agent of a model.
#[derive(Clone, Debug)]
pub struct Profile {
    /// Indexed by agent.
    pub strategies: Vec<MemorylessStrategy>,
}

/// Quotient chain of a memoryless profile:
/// `p(s, s') = Σ_ā (Π_a σ_a(s)(ā_a)) · δ(s, ā)(s')`.
pub fn induced_chain(cgs: &Cgs, profile: &Profile) -> Result<MarkovChain, OracleError> {
    if profile.strategies.len() != cgs.num_agents()
        || profile.strategies.iter().enumerate().any(|(i, st)| st.agent.0 != i)
    {
        return Err(OracleError::Profile("profile must give one strategy per agent, in agent order".into()));
    }
    let mut rows = Vec::with_capacity(cgs.num_states());
    for s in cgs.states() {
        let per_agent: Vec<Distribution<_>> = profile.strategies.iter().map(|st| st.choice[s.0].clone()).collect();
        let joint: Distribution<JointAction> = product_distribution(&per_agent);
        let mut acc: Vec<(StateId, Rational)> = Vec::new();
        for (ja, w) in joint.iter() {
            let succ = cgs
                .successors(s, ja)
                .map_err(|e| OracleError::Profile(e.to_string()))?;
            for (t, p) in succ.iter() {
                acc.push((*t, w * p));
            }
        }
        rows.push(Distribution::new(acc).map_err(|e| OracleError::Profile(e.to_string()))?);
    }
    Ok(MarkovChain { rows })
}

/// Qualitative regions of `(safe U target)` on a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainRegions {
    pub zero: Vec<bool>,
    pub one: Vec<bool>,
}

fn reaches(mc: &MarkovChain, through: &[bool], goal: &[bool]) -> Vec<bool> {
    let n = mc.len();
    let mut hit = goal.to_vec();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if !hit[s] && through[s] && mc.rows[s].support().any(|t| hit[t.0]) {
                hit[s] = true;
                changed = true;
            }
        }
    }
    hit
}

pub fn chain_regions(mc: &MarkovChain, safe: &[bool], target: &[bool]) -> ChainRegions {
    let open: Vec<bool> = (0..mc.len()).map(|s| safe[s] && !target[s]).collect();
    let zero: Vec<bool> = reaches(mc, &open, target).into_iter().map(|r| !r).collect();
    let one = reaches(mc, &open, &zero).into_iter().map(|r| !r).collect();
    ChainRegions { zero, one }
}

/// Dense Gauss-Jordan elimination; `a` is square and nonsingular.
fn gauss_jordan(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero()).expect("nonsingular system");
        a.swap(col, p);
        b.swap(col, p);
        let inv = Rational::one() / &a[col][col];
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                let d = &f * &a[col][j];
                a[r][j] = &a[r][j] - &d;
            }
            b[r] = &b[r] - &(&f * &b[col]);
        }
    }
    b
}

/// Exact `(safe U target)` probability per state.
pub fn chain_until_probability(mc: &MarkovChain, safe: &[bool], target: &[bool]) -> Vec<Rational> {
    let n = mc.len();
    let regions = chain_regions(mc, safe, target);
    let unknown: Vec<usize> = (0..n).filter(|&s| !target[s] && !regions.zero[s]).collect();
    let mut pos = vec![None; n];
    for (i, &s) in unknown.iter().enumerate() {
        pos[s] = Some(i);
    }
    let m = unknown.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (i, &s) in unknown.iter().enumerate() {
        a[i][i] = Rational::one();
        for (t, p) in mc.rows[s].iter() {
            if target[t.0] {
                b[i] = &b[i] + p;
            } else if let Some(j) = pos[t.0] {
                a[i][j] = &a[i][j] - p;
            }
        }
    }
    let x = gauss_jordan(a, b);
    (0..n)
        .map(|s| {
            if target[s] {
                Rational::one()
            } else {
                pos[s].map_or_else(Rational::zero, |i| x[i].clone())
            }
        })
        .collect()
}

/// One-step probability of landing in `target`.
pub fn chain_next_probability(mc: &MarkovChain, target: &[bool]) -> Vec<Rational> {
    mc.rows.iter().map(|r| r.mass(|t| target[t.0])).collect()
}
