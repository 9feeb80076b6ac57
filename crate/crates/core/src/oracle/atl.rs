//! Classical ATL with imperfect information and imperfect recall, for
//! deterministic structures: `<<C>>{>=1} ψ` holds at `s` iff some uniform
//! memoryless coalition strategy makes every play from `s` satisfy `ψ`.

use super::brute::{coalition_choices, completions, resolve_agents};
use super::OracleError;
use crate::logic::{Comparison, Formula};
use crate::model::{Cgs, StateId};

enum Path<'a> {
    Next(&'a Formula),
    Until(Option<&'a Formula>, &'a Formula),
    Always(&'a Formula),
}

fn unsupported(f: &Formula) -> OracleError {
    OracleError::Unsupported(format!("`{f}` is outside the classical fragment"))
}

fn eval(cgs: &Cgs, f: &Formula) -> Result<Vec<bool>, OracleError> {
    let n = cgs.num_states();
    Ok(match f {
        Formula::True => vec![true; n],
        Formula::Atom(p) => {
            let id = cgs.atom_id(p).map_err(|_| OracleError::Binding(p.clone()))?;
            cgs.states().map(|s| cgs.has_atom(s, id)).collect()
        }
        Formula::Not(g) => eval(cgs, g)?.into_iter().map(|b| !b).collect(),
        Formula::Or(a, b) => eval(cgs, a)?.into_iter().zip(eval(cgs, b)?).map(|(x, y)| x || y).collect(),
        Formula::Strategic(st) => {
            if st.dual || st.cmp != Comparison::Ge || !st.threshold.is_one() {
                return Err(unsupported(f));
            }
            let path = match &st.path {
                Formula::Next(g) => Path::Next(g),
                Formula::Until(a, b) => Path::Until(Some(a), b),
                Formula::Eventually(b) => Path::Until(None, b),
                Formula::Always(g) => Path::Always(g),
                _ => return Err(unsupported(f)),
            };
            let member = resolve_agents(cgs, &st.coalition)?;
            let mut holds = vec![false; n];
            for pick in coalition_choices(cgs, &member) {
                // Successor sets of the graph pruned by this choice.
                let succ: Vec<Vec<usize>> = (0..n)
                    .map(|s| {
                        let mut out: Vec<usize> = completions(cgs, StateId(s), &pick[s])
                            .iter()
                            .map(|ja| {
                                let d = cgs.successors(StateId(s), ja).expect("legal");
                                d.as_dirac().expect("deterministic").0
                            })
                            .collect();
                        out.sort_unstable();
                        out.dedup();
                        out
                    })
                    .collect();
                let win = match path {
                    Path::Next(g) => {
                        let t = eval(cgs, g)?;
                        (0..n).map(|s| succ[s].iter().all(|&x| t[x])).collect()
                    }
                    Path::Until(a, b) => {
                        let safe = match a {
                            Some(a) => eval(cgs, a)?,
                            None => vec![true; n],
                        };
                        let mut w = eval(cgs, b)?;
                        loop {
                            let grow: Vec<usize> = (0..n)
                                .filter(|&s| !w[s] && safe[s] && succ[s].iter().all(|&x| w[x]))
                                .collect();
                            if grow.is_empty() {
                                break w;
                            }
                            grow.into_iter().for_each(|s| w[s] = true);
                        }
                    }
                    Path::Always(g) => {
                        let mut w = eval(cgs, g)?;
                        loop {
                            let drop: Vec<usize> = (0..n).filter(|&s| w[s] && succ[s].iter().any(|&x| !w[x])).collect();
                            if drop.is_empty() {
                                break w;
                            }
                            drop.into_iter().for_each(|s| w[s] = false);
                        }
                    }
                };
                for s in 0..n {
                    holds[s] |= win[s];
                }
            }
            holds
        }
        _ => return Err(unsupported(f)),
    })
}

/// Verdicts of a formula whose modalities are all `<<C>>{>=1}` with an
/// `X`, `U`, `F` or `G` path, on a model with point-distribution transitions.
pub fn atl_ir_check(cgs: &Cgs, f: &Formula) -> Result<Vec<bool>, OracleError> {
    if !cgs.is_deterministic() {
        return Err(OracleError::Unsupported("model has non-Dirac transitions".into()));
    }
    eval(cgs, f)
}
