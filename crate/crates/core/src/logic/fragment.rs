//! The PATL fragment: every temporal operator sits directly under a strategic
//! modality and has state-formula operands.

use std::fmt;

use thiserror::Error;

use super::{Coalition, Comparison, Formula};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a PATL formula: {reason} in `{subterm}`")]
pub struct FragmentError {
    pub subterm: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StateFormula {
    True,
    Atom(String),
    Not(Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    Strategic(Box<PatlModality>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PatlModality {
    pub coalition: Coalition,
    pub cmp: Comparison,
    pub threshold: Rational,
    pub objective: PathObjective,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PathObjective {
    Next(StateFormula),
    Until(StateFormula, StateFormula),
}

impl From<&StateFormula> for Formula {
    fn from(f: &StateFormula) -> Formula {
        match f {
            StateFormula::True => Formula::True,
            StateFormula::Atom(p) => Formula::Atom(p.clone()),
            StateFormula::Not(g) => Formula::from(&**g).not(),
            StateFormula::Or(a, b) => Formula::from(&**a).or(Formula::from(&**b)),
            StateFormula::Strategic(m) => {
                let path = match &m.objective {
                    PathObjective::Next(g) => Formula::from(g).next(),
                    PathObjective::Until(a, b) => Formula::from(a).until(Formula::from(b)),
                };
                Formula::strategic(m.coalition.clone(), m.cmp, m.threshold.clone(), path)
            }
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Formula::from(self))
    }
}

impl StateFormula {
    pub fn modality_depth(&self) -> usize {
        Formula::from(self).modality_depth()
    }
}

fn has_temporal(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::Atom(_) | Formula::Strategic(_) => false,
        Formula::Not(g) => has_temporal(g),
        Formula::Or(a, b) => has_temporal(a) || has_temporal(b),
        Formula::Next(_) | Formula::Until(..) | Formula::Eventually(_) | Formula::Always(_) => true,
    }
}

fn fail(f: &Formula, reason: &str) -> FragmentError {
    FragmentError {
        subterm: f.to_string(),
        reason: reason.to_string(),
    }
}

fn state(f: &Formula) -> Result<StateFormula, FragmentError> {
    match f {
        Formula::True => Ok(StateFormula::True),
        Formula::Atom(p) => Ok(StateFormula::Atom(p.clone())),
        Formula::Not(g) => Ok(StateFormula::Not(Box::new(state(g)?))),
        Formula::Or(a, b) => Ok(StateFormula::Or(Box::new(state(a)?), Box::new(state(b)?))),
        Formula::Next(_) | Formula::Until(..) => Err(fail(f, "temporal operator outside a strategic modality")),
        Formula::Eventually(_) | Formula::Always(_) => Err(fail(f, "unexpanded F/G (desugar first)")),
        Formula::Strategic(s) => {
            if s.dual {
                return Err(fail(f, "unexpanded dual modality (desugar first)"));
            }
            let operand = |g: &Formula| {
                if has_temporal(g) {
                    Err(fail(g, "nested temporal operator"))
                } else {
                    state(g)
                }
            };
            let objective = match &s.path {
                Formula::Next(g) => PathObjective::Next(operand(g)?),
                Formula::Until(a, b) => PathObjective::Until(operand(a)?, operand(b)?),
                Formula::Eventually(_) | Formula::Always(_) => {
                    return Err(fail(f, "unexpanded F/G (desugar first)"))
                }
                p @ (Formula::Not(_) | Formula::Or(..)) if has_temporal(p) => {
                    return Err(fail(p, "boolean combination of path formulas"))
                }
                p => return Err(fail(p, "strategic modality without a temporal operator")),
            };
            Ok(StateFormula::Strategic(Box::new(PatlModality {
                coalition: s.coalition.clone(),
                cmp: s.cmp,
                threshold: s.threshold.clone(),
                objective,
            })))
        }
    }
}

/// Converts a desugared formula into the PATL fragment, naming the offending
/// subterm otherwise.
pub fn to_patl(f: &Formula) -> Result<StateFormula, FragmentError> {
    state(f)
}

/// Membership test with diagnostic.
pub fn is_patl(f: &Formula) -> (bool, Option<FragmentError>) {
    match to_patl(f) {
        Ok(_) => (true, None),
        Err(e) => (false, Some(e)),
    }
}
