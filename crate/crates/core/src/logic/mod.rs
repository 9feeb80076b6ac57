//! PATL / PATL* syntax: the formula tree, its concrete syntax, desugaring and
//! the PATL fragment check.
//!
//! Concrete syntax, loosest binding first:
//!
//! ```text
//! f ::= f -> f            right associative
//!     | f | f
//!     | f & f
//!     | f U f             right associative
//!     | !f | X f | F f | G f
//!     | <<C>>{cmp d} f    exists a coalition strategy
//!     | [[C]]{cmp d} f    dual modality
//!     | true | false | atom | ( f )
//! C ::= a,b,... | * (grand coalition) | (empty coalition)
//! ```
//!
//! `&`, `->` and `false` are expanded by the parser, so trees only contain
//! negation and disjunction as connectives.

mod desugar;
mod fragment;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::rational::Rational;

pub use desugar::desugar;
pub use fragment::{is_patl, to_patl, FragmentError, PathObjective, PatlModality, StateFormula};
pub use parser::{parse_formula, parse_formula_lines, ParseError};

/// Threshold comparison `⋈`. There is deliberately no equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

/// Which adversary extremum decides a threshold comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

impl Comparison {
    pub fn holds(self, value: &Rational, threshold: &Rational) -> bool {
        match self {
            Comparison::Le => value <= threshold,
            Comparison::Lt => value < threshold,
            Comparison::Gt => value > threshold,
            Comparison::Ge => value >= threshold,
        }
    }

    /// `≥ ↔ ≤`, `> ↔ <`: `μ(¬ψ) ⋈ d` iff `μ(ψ) mirror(⋈) 1-d`.
    pub fn mirror(self) -> Comparison {
        match self {
            Comparison::Le => Comparison::Ge,
            Comparison::Lt => Comparison::Gt,
            Comparison::Gt => Comparison::Lt,
            Comparison::Ge => Comparison::Le,
        }
    }

    /// Lower bounds must survive the worst adversary (minimum), upper bounds
    /// the most favourable one (maximum).
    pub fn extremum(self) -> Extremum {
        match self {
            Comparison::Ge | Comparison::Gt => Extremum::Min,
            Comparison::Le | Comparison::Lt => Extremum::Max,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Le => "<=",
            Comparison::Lt => "<",
            Comparison::Gt => ">",
            Comparison::Ge => ">=",
        }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coalition {
    /// `<<*>>`: every agent of the model.
    Grand,
    Agents(BTreeSet<String>),
}

impl Coalition {
    pub fn empty() -> Self {
        Coalition::Agents(BTreeSet::new())
    }

    pub fn of<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Coalition::Agents(names.into_iter().map(Into::into).collect())
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coalition::Grand => f.write_str("*"),
            Coalition::Agents(names) => {
                let v: Vec<&str> = names.iter().map(String::as_str).collect();
                f.write_str(&v.join(","))
            }
        }
    }
}

/// A strategic modality `<<C>>^{⋈d} ψ`, or its dual `[[C]]^{⋈d} ψ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Strategic {
    pub coalition: Coalition,
    pub dual: bool,
    pub cmp: Comparison,
    pub threshold: Rational,
    pub path: Formula,
}

/// PATL* formula tree. State and path formulas share one grammar.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    Atom(String),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Strategic(Box<Strategic>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn or(self, rhs: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn and(self, rhs: Formula) -> Formula {
        self.not().or(rhs.not()).not()
    }

    pub fn implies(self, rhs: Formula) -> Formula {
        self.not().or(rhs)
    }

    pub fn next(self) -> Formula {
        Formula::Next(Box::new(self))
    }

    pub fn until(self, rhs: Formula) -> Formula {
        Formula::Until(Box::new(self), Box::new(rhs))
    }

    pub fn eventually(self) -> Formula {
        Formula::Eventually(Box::new(self))
    }

    pub fn always(self) -> Formula {
        Formula::Always(Box::new(self))
    }

    pub fn strategic(coalition: Coalition, cmp: Comparison, threshold: Rational, path: Formula) -> Formula {
        Formula::Strategic(Box::new(Strategic {
            coalition,
            dual: false,
            cmp,
            threshold,
            path,
        }))
    }

    pub fn dual(coalition: Coalition, cmp: Comparison, threshold: Rational, path: Formula) -> Formula {
        Formula::Strategic(Box::new(Strategic {
            coalition,
            dual: true,
            cmp,
            threshold,
            path,
        }))
    }

    /// Maximum nesting depth of strategic modalities.
    pub fn modality_depth(&self) -> usize {
        match self {
            Formula::True | Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Next(f) | Formula::Eventually(f) | Formula::Always(f) => f.modality_depth(),
            Formula::Or(a, b) | Formula::Until(a, b) => a.modality_depth().max(b.modality_depth()),
            Formula::Strategic(s) => 1 + s.path.modality_depth(),
        }
    }
}

/// Canonical, fully parenthesized form; parses back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::Atom(p) => f.write_str(p),
            Formula::Not(g) => write!(f, "!{g}"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Next(g) => write!(f, "(X {g})"),
            Formula::Until(a, b) => write!(f, "({a} U {b})"),
            Formula::Eventually(g) => write!(f, "(F {g})"),
            Formula::Always(g) => write!(f, "(G {g})"),
            Formula::Strategic(s) => {
                let (open, close) = if s.dual { ("[[", "]]") } else { ("<<", ">>") };
                write!(f, "{open}{}{close}{{{}{}}}{}", s.coalition, s.cmp, s.threshold, s.path)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_is_an_involution() {
        for c in [Comparison::Le, Comparison::Lt, Comparison::Gt, Comparison::Ge] {
            assert_eq!(c.mirror().mirror(), c);
            assert_ne!(c.mirror().extremum(), c.extremum());
        }
    }

    #[test]
    fn comparisons() {
        let half = Rational::new(1, 2);
        assert!(Comparison::Ge.holds(&half, &half));
        assert!(!Comparison::Gt.holds(&half, &half));
        assert!(Comparison::Le.holds(&half, &half));
        assert!(!Comparison::Lt.holds(&half, &half));
    }

    #[test]
    fn canonical_printing() {
        let f = Formula::strategic(
            Coalition::of(["1", "2"]),
            Comparison::Ge,
            Rational::new(1, 2),
            Formula::atom("p").until(Formula::atom("q")),
        );
        assert_eq!(f.to_string(), "<<1,2>>{>=1/2}(p U q)");
        let g = Formula::dual(Coalition::Grand, Comparison::Lt, Rational::new(1, 4), Formula::atom("p").next());
        assert_eq!(g.clone().not().to_string(), "![[*]]{<1/4}(X p)");
        assert_eq!(g.modality_depth(), 1);
    }
}
