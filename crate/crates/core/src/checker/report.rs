use std::fmt::Write as _;

use serde::Serialize;

use super::{BoundModality, StrategicOutcome};
use crate::logic::{Comparison, Extremum, Formula};
use crate::model::{Cgs, StateId};
use crate::strategy::{CoalitionAssignment, Witness};

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub formula: String,
    pub desugared: String,
    pub states: Vec<String>,
    /// Distinct state subformulas, children before parents; the last one is the input.
    pub subformulas: Vec<SubformulaReport>,
    pub stats: Stats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubformulaReport {
    pub id: usize,
    pub formula: String,
    /// Verdict per state, aligned with `CheckReport::states`.
    pub holds: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategic: Option<StrategicReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StrategicReport {
    pub coalition: Vec<String>,
    pub objective: ObjectiveRef,
    pub comparison: Comparison,
    pub threshold: String,
    pub adversary: Extremum,
    pub strategies_total: u64,
    pub strategies_examined: u64,
    /// One entry per satisfied state.
    pub witnesses: Vec<WitnessEntry>,
}

/// Path objective of a modality, by subformula id of its operands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveRef {
    Next { target: usize },
    Until { safe: usize, target: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessEntry {
    pub state: String,
    /// Extremal probability the witness achieves at `state`.
    pub value: String,
    /// Position of the witness in the enumeration order.
    pub index: u64,
    pub strategy: Witness,
    #[serde(skip)]
    pub assignment: CoalitionAssignment,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Stats {
    pub strategic_subformulas: usize,
    pub strategies_total: u64,
    pub strategies_examined: u64,
    /// One MDP solve per examined assignment.
    pub mdp_solves: u64,
}

impl StrategicReport {
    pub(super) fn new(cgs: &Cgs, m: &BoundModality, objective: ObjectiveRef, out: &StrategicOutcome) -> Self {
        let witnesses = out
            .witnesses
            .iter()
            .enumerate()
            .filter_map(|(s, w)| {
                w.as_ref().map(|(i, a, v)| WitnessEntry {
                    state: cgs.state_name(StateId(s)).to_string(),
                    value: v.to_fraction_string(),
                    index: *i,
                    strategy: a.to_witness(cgs),
                    assignment: a.clone(),
                })
            })
            .collect();
        StrategicReport {
            coalition: m.coalition.iter().map(|a| cgs.agent_name(*a).to_string()).collect(),
            objective,
            comparison: m.cmp,
            threshold: m.threshold.to_fraction_string(),
            adversary: m.cmp.extremum(),
            strategies_total: out.strategies_total,
            strategies_examined: out.strategies_examined,
            witnesses,
        }
    }
}

impl CheckReport {
    pub(super) fn assemble(
        cgs: &Cgs,
        input: &Formula,
        desugared: &Formula,
        subformulas: Vec<SubformulaReport>,
        root: usize,
        elapsed_ms: Option<f64>,
    ) -> Self {
        debug_assert_eq!(root + 1, subformulas.len());
        let mut stats = Stats::default();
        for st in subformulas.iter().filter_map(|e| e.strategic.as_ref()) {
            stats.strategic_subformulas += 1;
            stats.strategies_total += st.strategies_total;
            stats.strategies_examined += st.strategies_examined;
            stats.mdp_solves += st.strategies_examined;
        }
        CheckReport {
            formula: input.to_string(),
            desugared: desugared.to_string(),
            states: cgs.state_names().to_vec(),
            subformulas,
            stats,
            elapsed_ms,
        }
    }

    pub fn root(&self) -> &SubformulaReport {
        self.subformulas.last().expect("report has a root")
    }

    pub fn root_holds(&self) -> &[bool] {
        &self.root().holds
    }

    pub fn holds_at(&self, s: StateId) -> bool {
        self.root().holds[s.0]
    }

    pub fn holds_everywhere(&self) -> bool {
        self.root().holds.iter().all(|h| *h)
    }

    /// Verdicts of a subformula given by its canonical text.
    pub fn find(&self, formula: &str) -> Option<&SubformulaReport> {
        self.subformulas.iter().find(|e| e.formula == formula)
    }
}

/// Human-readable table: states as rows, subformulas as columns, followed by
/// the subformula legend and witnesses.
pub fn render_table(r: &CheckReport, only: Option<StateId>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "formula:   {}", r.formula);
    if r.desugared != r.formula {
        let _ = writeln!(out, "desugared: {}", r.desugared);
    }
    out.push('\n');
    let width = r.states.iter().map(|s| s.chars().count()).max().unwrap_or(0).max(5);
    let _ = write!(out, "{:<width$}", "state");
    for e in &r.subformulas {
        let _ = write!(out, " {:>4}", format!("#{}", e.id));
    }
    out.push('\n');
    for (s, name) in r.states.iter().enumerate() {
        if only.is_some_and(|o| o.0 != s) {
            continue;
        }
        let _ = write!(out, "{name:<width$}");
        for e in &r.subformulas {
            let _ = write!(out, " {:>4}", if e.holds[s] { "✓" } else { "✗" });
        }
        out.push('\n');
    }
    out.push('\n');
    for e in &r.subformulas {
        let _ = writeln!(out, "#{:<3} {}", e.id, e.formula);
    }
    for e in &r.subformulas {
        let Some(st) = &e.strategic else { continue };
        let _ = writeln!(
            out,
            "\n#{}: coalition [{}], adversary {}, {} of {} assignments examined",
            e.id,
            st.coalition.join(","),
            match st.adversary {
                Extremum::Min => "minimizes",
                Extremum::Max => "maximizes",
            },
            st.strategies_examined,
            st.strategies_total
        );
        for w in &st.witnesses {
            if only.is_some_and(|o| r.states[o.0] != w.state) {
                continue;
            }
            let strat: Vec<String> = w
                .strategy
                .iter()
                .map(|(agent, m)| {
                    let picks: Vec<String> = m.iter().map(|(s, c)| format!("{s}:{c}")).collect();
                    format!("{agent}{{{}}}", picks.join(" "))
                })
                .collect();
            let _ = writeln!(out, "  {} value {} via {}", w.state, w.value, strat.join(" "));
        }
    }
    let _ = writeln!(
        out,
        "\n{} strategic subformula(s), {} assignment(s) examined of {}",
        r.stats.strategic_subformulas, r.stats.strategies_examined, r.stats.strategies_total
    );
    if let Some(ms) = r.elapsed_ms {
        let _ = writeln!(out, "elapsed {ms:.1} ms");
    }
    out
}
