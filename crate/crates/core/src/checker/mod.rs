//! Bottom-up PATL model checking against uniform memoryless deterministic
//! coalition strategies.
//!
//! Each strategic subformula is decided by enumerating coalition assignments
//! in their canonical order and solving one induced MDP per assignment. The
//! value vector of a single solve decides every state at once; a state's
//! witness is the first assignment in enumeration order that satisfies it.

mod report;

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::logic::{desugar, to_patl, Coalition, Comparison, FragmentError, Formula, PathObjective, StateFormula};
use crate::mdp::{extremal_next, extremal_until, induce_mdp, StateSet};
use crate::model::{AgentId, AtomId, Cgs};
use crate::rational::Rational;
use crate::strategy::{CoalitionAssignment, StrategySpace};

pub use report::{render_table, CheckReport, ObjectiveRef, Stats, StrategicReport, SubformulaReport, WitnessEntry};

/// Assignments handed to a worker at once.
const CHUNK: u64 = 256;

/// An assignment that satisfied some state: index, assignment, value per
/// newly satisfied state.
type Hit = (u64, CoalitionAssignment, Vec<Option<Rational>>);

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("unknown {kind} `{name}` in formula")]
    Binding { kind: &'static str, name: String },
    #[error("coalition strategy space of `{formula}` has {count} assignments, above the limit of {limit}")]
    TooManyStrategies { formula: String, count: String, limit: u64 },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    /// Worker threads; 0 lets the runtime decide.
    pub jobs: usize,
    /// Refuse strategic subformulas whose strategy space is larger.
    pub max_strategies: u64,
    /// Record wall-clock time in the report.
    pub timing: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            jobs: 1,
            max_strategies: 1_000_000,
            timing: false,
        }
    }
}

/// A PATL state formula with names resolved against a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    True,
    Atom(AtomId),
    Not(Box<Bound>),
    Or(Box<Bound>, Box<Bound>),
    Strategic(Box<BoundModality>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundModality {
    pub coalition: Vec<AgentId>,
    pub cmp: Comparison,
    pub threshold: Rational,
    pub objective: BoundObjective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundObjective {
    Next(Bound),
    Until(Bound, Bound),
}

/// Resolves a coalition against the model's agents.
pub fn bind_coalition(cgs: &Cgs, c: &Coalition) -> Result<Vec<AgentId>, CheckError> {
    match c {
        Coalition::Grand => Ok(cgs.agents().collect()),
        Coalition::Agents(names) => names
            .iter()
            .map(|n| {
                cgs.agent_id(n).map_err(|_| CheckError::Binding {
                    kind: "agent",
                    name: n.clone(),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|mut v| {
                v.sort();
                v
            }),
    }
}

/// Resolves atom and agent names.
pub fn bind(cgs: &Cgs, f: &StateFormula) -> Result<Bound, CheckError> {
    Ok(match f {
        StateFormula::True => Bound::True,
        StateFormula::Atom(p) => Bound::Atom(cgs.atom_id(p).map_err(|_| CheckError::Binding {
            kind: "atom",
            name: p.clone(),
        })?),
        StateFormula::Not(g) => Bound::Not(Box::new(bind(cgs, g)?)),
        StateFormula::Or(a, b) => Bound::Or(Box::new(bind(cgs, a)?), Box::new(bind(cgs, b)?)),
        StateFormula::Strategic(m) => Bound::Strategic(Box::new(BoundModality {
            coalition: bind_coalition(cgs, &m.coalition)?,
            cmp: m.cmp,
            threshold: m.threshold.clone(),
            objective: match &m.objective {
                PathObjective::Next(g) => BoundObjective::Next(bind(cgs, g)?),
                PathObjective::Until(a, b) => BoundObjective::Until(bind(cgs, a)?, bind(cgs, b)?),
            },
        })),
    })
}

/// Outcome of one strategic subformula.
#[derive(Clone, Debug)]
pub struct StrategicOutcome {
    pub holds: StateSet,
    /// Per state: the first satisfying assignment in enumeration order, its
    /// index, and the extremal value it achieves there.
    pub witnesses: Vec<Option<(u64, CoalitionAssignment, Rational)>>,
    pub strategies_total: u64,
    pub strategies_examined: u64,
}

/// Labels from one assignment: extremal value per state.
fn solve_assignment(cgs: &Cgs, m: &BoundModality, objective: &LabeledObjective, a: &CoalitionAssignment) -> Vec<Rational> {
    let mdp = induce_mdp(cgs, a);
    let mode = m.cmp.extremum();
    match objective {
        LabeledObjective::Next(t) => extremal_next(&mdp, t, mode).values,
        LabeledObjective::Until(s, t) => extremal_until(&mdp, s, t, mode).values,
    }
}

/// Path objective whose operands are already state sets.
#[derive(Clone, Debug)]
pub enum LabeledObjective {
    Next(StateSet),
    Until(StateSet, StateSet),
}

/// Decides `<<C>>{cmp d} objective` at every state.
///
/// Runs on the current rayon pool. The result does not depend on the
/// number of worker threads.
pub fn eval_strategic(
    cgs: &Cgs,
    m: &BoundModality,
    objective: &LabeledObjective,
    max_strategies: u64,
    label: &str,
) -> Result<StrategicOutcome, CheckError> {
    let space = StrategySpace::new(cgs, &m.coalition);
    let total = match space.count_u64() {
        Some(t) if t <= max_strategies => t,
        _ => {
            return Err(CheckError::TooManyStrategies {
                formula: label.to_string(),
                count: space.count().to_string(),
                limit: max_strategies,
            })
        }
    };
    let n = cgs.num_states();
    let mut holds = vec![false; n];
    let mut witnesses: Vec<Option<(u64, CoalitionAssignment, Rational)>> = vec![None; n];
    let mut remaining = n;
    let mut examined = total;
    let chunks = total.div_ceil(CHUNK);
    let batch = (rayon::current_num_threads() as u64).max(1) * 2;

    let mut next_chunk = 0;
    'outer: while next_chunk < chunks {
        let upto = (next_chunk + batch).min(chunks);
        let settled = holds.clone();
        let results: Vec<Vec<Hit>> = (next_chunk..upto)
            .into_par_iter()
            .map(|c| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(total);
                (lo..hi)
                    .filter_map(|i| {
                        let a = space.at(i).expect("index in range");
                        let values = solve_assignment(cgs, m, objective, &a);
                        let hits: Vec<Option<Rational>> = values
                            .into_iter()
                            .enumerate()
                            .map(|(s, v)| (!settled[s] && m.cmp.holds(&v, &m.threshold)).then_some(v))
                            .collect();
                        hits.iter().any(Option::is_some).then_some((i, a, hits))
                    })
                    .collect()
            })
            .collect();
        for (i, a, hits) in results.into_iter().flatten() {
            for (s, hit) in hits.into_iter().enumerate() {
                if let (Some(v), false) = (hit, holds[s]) {
                    holds[s] = true;
                    witnesses[s] = Some((i, a.clone(), v));
                    remaining -= 1;
                }
            }
            if remaining == 0 {
                examined = i + 1;
                break 'outer;
            }
        }
        next_chunk = upto;
    }
    Ok(StrategicOutcome {
        holds,
        witnesses,
        strategies_total: total,
        strategies_examined: examined,
    })
}

fn labeled(entries: &[SubformulaReport], refs: ObjectiveRef) -> LabeledObjective {
    match refs {
        ObjectiveRef::Next { target } => LabeledObjective::Next(entries[target].holds.clone()),
        ObjectiveRef::Until { safe, target } => {
            LabeledObjective::Until(entries[safe].holds.clone(), entries[target].holds.clone())
        }
    }
}

/// Re-solves a strategic subformula of `report` with the coalition fixed to
/// `assignment`; returns the extremal value per state.
pub fn replay_assignment(
    cgs: &Cgs,
    report: &CheckReport,
    subformula: usize,
    assignment: &CoalitionAssignment,
) -> Option<Vec<Rational>> {
    let st = report.subformulas.get(subformula)?.strategic.as_ref()?;
    let m = BoundModality {
        coalition: assignment.agents().collect(),
        cmp: st.comparison,
        threshold: st.threshold.parse().ok()?,
        // Operands are taken from the report; this field is unused here.
        objective: BoundObjective::Next(Bound::True),
    };
    Some(solve_assignment(cgs, &m, &labeled(&report.subformulas, st.objective), assignment))
}

struct Labeler<'a> {
    cgs: &'a Cgs,
    options: &'a CheckOptions,
    memo: HashMap<String, usize>,
    entries: Vec<SubformulaReport>,
}

impl Labeler<'_> {
    /// Labels `f` and its subformulas; returns its index in `entries`.
    fn label(&mut self, sf: &StateFormula, b: &Bound) -> Result<usize, CheckError> {
        let key = sf.to_string();
        if let Some(&i) = self.memo.get(&key) {
            return Ok(i);
        }
        let n = self.cgs.num_states();
        let (holds, strategic) = match (sf, b) {
            (StateFormula::True, _) => (vec![true; n], None),
            (StateFormula::Atom(_), Bound::Atom(p)) => (self.cgs.states().map(|s| self.cgs.has_atom(s, *p)).collect(), None),
            (StateFormula::Not(g), Bound::Not(bg)) => {
                let i = self.label(g, bg)?;
                (self.entries[i].holds.iter().map(|h| !h).collect(), None)
            }
            (StateFormula::Or(x, y), Bound::Or(bx, by)) => {
                let i = self.label(x, bx)?;
                let j = self.label(y, by)?;
                let h = self.entries[i].holds.iter().zip(&self.entries[j].holds).map(|(a, b)| *a || *b).collect();
                (h, None)
            }
            (StateFormula::Strategic(sm), Bound::Strategic(bm)) => {
                let refs = match (&sm.objective, &bm.objective) {
                    (PathObjective::Next(g), BoundObjective::Next(bg)) => ObjectiveRef::Next {
                        target: self.label(g, bg)?,
                    },
                    (PathObjective::Until(x, y), BoundObjective::Until(bx, by)) => ObjectiveRef::Until {
                        safe: self.label(x, bx)?,
                        target: self.label(y, by)?,
                    },
                    _ => unreachable!("bound tree mirrors the formula"),
                };
                let objective = labeled(&self.entries, refs);
                let out = eval_strategic(self.cgs, bm, &objective, self.options.max_strategies, &key)?;
                let rep = StrategicReport::new(self.cgs, bm, refs, &out);
                (out.holds, Some(rep))
            }
            _ => unreachable!("bound tree mirrors the formula"),
        };
        let id = self.entries.len();
        self.entries.push(SubformulaReport {
            id,
            formula: key.clone(),
            holds,
            strategic,
        });
        self.memo.insert(key, id);
        Ok(id)
    }
}

/// Model checks `f` at every state of `cgs`.
pub fn check(cgs: &Cgs, f: &Formula, options: &CheckOptions) -> Result<CheckReport, CheckError> {
    let start = Instant::now();
    let desugared = desugar(f);
    let sf = to_patl(&desugared)?;
    let bound = bind(cgs, &sf)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| CheckError::Pool(e.to_string()))?;
    let mut labeler = Labeler {
        cgs,
        options,
        memo: HashMap::new(),
        entries: Vec::new(),
    };
    let root = pool.install(|| labeler.label(&sf, &bound))?;
    Ok(CheckReport::assemble(
        cgs,
        f,
        &desugared,
        labeler.entries,
        root,
        options.timing.then(|| start.elapsed().as_secs_f64() * 1000.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;
    use crate::model::StateId;

    /// Agent `a` chooses at `s` between reaching `win` or `lose`; `b` can
    /// turn a `go` into a coin flip.
    fn game() -> Cgs {
        Cgs::from_json(
            r#"{
            "agents": ["a", "b"], "actions": ["go", "stay"],
            "atoms": ["p"],
            "states": [{"id": "s"}, {"id": "win", "atoms": ["p"]}, {"id": "lose"}],
            "legality": {
                "s": {"a": ["go", "stay"], "b": ["go", "stay"]},
                "win": {"a": ["go"], "b": ["go"]},
                "lose": {"a": ["go"], "b": ["go"]}
            },
            "transitions": [
                {"state": "s", "action": {"a": "go", "b": "go"}, "dist": {"win": "1"}},
                {"state": "s", "action": {"a": "go", "b": "stay"}, "dist": {"win": "1/2", "lose": "1/2"}},
                {"state": "s", "action": {"a": "stay", "b": "go"}, "dist": {"s": "1"}},
                {"state": "s", "action": {"a": "stay", "b": "stay"}, "dist": {"lose": "1"}},
                {"state": "win", "action": {"a": "go", "b": "go"}, "dist": {"win": "1"}},
                {"state": "lose", "action": {"a": "go", "b": "go"}, "dist": {"lose": "1"}}
            ]}"#,
        )
        .unwrap()
    }

    fn run(g: &Cgs, f: &str) -> CheckReport {
        check(g, &parse_formula(f).unwrap(), &CheckOptions::default()).unwrap()
    }

    #[test]
    fn zero_threshold_is_trivial() {
        let g = game();
        assert_eq!(run(&g, "<<a>>{>=0} X p").root_holds(), &[true; 3]);
    }

    #[test]
    fn coin_flip_thresholds() {
        let g = game();
        assert_eq!(run(&g, "<<a>>{>=1/2} F p").root_holds(), &[true, true, false]);
        assert_eq!(run(&g, "<<a>>{>1/2} F p").root_holds(), &[false, true, false]);
        assert_eq!(run(&g, "<<a,b>>{>=1} F p").root_holds(), &[true, true, false]);
        assert_eq!(run(&g, "<<>>{<=0} F p").root_holds(), &[false, false, true]);
        assert_eq!(run(&g, "<<>>{<1} F p").root_holds(), &[false, false, true]);
    }

    #[test]
    fn witness_reports_first_satisfying_assignment() {
        let g = game();
        let r = run(&g, "<<a>>{>=1/2} X p");
        let st = r.root().strategic.as_ref().unwrap();
        let w = &st.witnesses[0];
        assert_eq!(w.state, "s");
        assert_eq!(w.value, "1/2");
        assert_eq!(w.strategy["a"]["s"], "go");
        assert_eq!(st.strategies_total, 2);
    }

    #[test]
    fn empty_target_is_unsatisfiable() {
        let g = game();
        let r = run(&g, "<<a>>{>=1/4} X (p & !p)");
        assert_eq!(r.root_holds(), &[false; 3]);
    }

    #[test]
    fn shared_subformulas_are_labeled_once() {
        let g = game();
        let r = run(&g, "<<a>>{>=1/2} F p | !<<a>>{>=1/2} F p");
        let strategic = r.subformulas.iter().filter(|e| e.strategic.is_some()).count();
        assert_eq!(strategic, 1);
        assert_eq!(r.root_holds(), &[true; 3]);
    }

    #[test]
    fn errors() {
        let g = game();
        let opts = CheckOptions::default();
        assert!(matches!(
            check(&g, &parse_formula("<<a>>{>=1/2} X q").unwrap(), &opts),
            Err(CheckError::Binding { kind: "atom", .. })
        ));
        assert!(matches!(
            check(&g, &parse_formula("<<z>>{>=1/2} X p").unwrap(), &opts),
            Err(CheckError::Binding { kind: "agent", .. })
        ));
        assert!(matches!(
            check(&g, &parse_formula("<<a>>{>=1/2} X X p").unwrap(), &opts),
            Err(CheckError::Fragment(_))
        ));
        let tight = CheckOptions {
            max_strategies: 2,
            ..CheckOptions::default()
        };
        assert!(matches!(
            check(&g, &parse_formula("<<a,b>>{>=1/2} X p").unwrap(), &tight),
            Err(CheckError::TooManyStrategies { .. })
        ));
    }

    #[test]
    fn early_exit_counts_examined_assignments() {
        let g = game();
        // Every assignment satisfies >=0 everywhere: stop after the first.
        let r = run(&g, "<<a>>{>=0} X p");
        let st = r.root().strategic.as_ref().unwrap();
        assert_eq!(st.strategies_examined, 1);
        assert_eq!(r.stats.strategies_examined, 1);
    }

    #[test]
    fn job_count_does_not_change_the_report() {
        let g = game();
        let f = parse_formula("<<a>>{>=1/2} (!p U <<b>>{<1} X p)").unwrap();
        let one = check(&g, &f, &CheckOptions::default()).unwrap();
        let many = check(&g, &f, &CheckOptions { jobs: 4, ..CheckOptions::default() }).unwrap();
        assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
        assert_eq!(one.root_holds(), &[true, false, true]);
        assert!(one.holds_at(StateId(0)));
    }
}
