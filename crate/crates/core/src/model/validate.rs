use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use super::{cartesian, ActionId, AgentId, AtomId, Cgs, Distribution, JointAction, Partition, ProbLiteral, RawModel, StateId};
use crate::rational::Rational;

/// One well-formedness problem in a raw model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyNamespace { namespace: String },
    DuplicateLabel { namespace: String, label: String },
    UnknownIdentifier { namespace: String, name: String, location: String },
    MissingLegality { state: String, agent: String },
    EmptyLegality { state: String, agent: String },
    UniformityBreach { agent: String, state: String, other: String },
    ObservationUncovered { agent: String, state: String },
    ObservationOverlap { agent: String, state: String },
    EmptyObservationClass { agent: String, class: usize },
    IncompleteJointAction { location: String, agent: String },
    IllegalTransition { state: String, action: String },
    DuplicateTransition { state: String, action: String },
    MissingTransition { state: String, action: String },
    InvalidProbability { location: String, literal: String, reason: String },
    DistributionSum { state: String, action: String, total: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyNamespace { namespace } => write!(f, "{namespace}: must be non-empty"),
            DuplicateLabel { namespace, label } => write!(f, "{namespace}: duplicate label `{label}`"),
            UnknownIdentifier { namespace, name, location } => {
                write!(f, "{location}: unknown {namespace} `{name}`")
            }
            MissingLegality { state, agent } => {
                write!(f, "legality[{state}][{agent}]: missing")
            }
            EmptyLegality { state, agent } => {
                write!(f, "legality[{state}][{agent}]: empty action set")
            }
            UniformityBreach { agent, state, other } => write!(
                f,
                "observation[{agent}]: `{state}` and `{other}` are indistinguishable but have different legal actions"
            ),
            ObservationUncovered { agent, state } => {
                write!(f, "observation[{agent}]: state `{state}` is in no class")
            }
            ObservationOverlap { agent, state } => {
                write!(f, "observation[{agent}]: state `{state}` is in more than one class")
            }
            EmptyObservationClass { agent, class } => {
                write!(f, "observation[{agent}][{class}]: empty class")
            }
            IncompleteJointAction { location, agent } => {
                write!(f, "{location}: no action given for agent `{agent}`")
            }
            IllegalTransition { state, action } => {
                write!(f, "transition {state} {action}: joint action is not legal")
            }
            DuplicateTransition { state, action } => {
                write!(f, "transition {state} {action}: defined more than once")
            }
            MissingTransition { state, action } => {
                write!(f, "transition {state} {action}: missing for a legal joint action")
            }
            InvalidProbability { location, literal, reason } => {
                write!(f, "{location}: invalid probability `{literal}`: {reason}")
            }
            DistributionSum { state, action, total } => {
                write!(f, "transition {state} {action}: probabilities sum to {total}, expected 1")
            }
        }
    }
}

/// Every violation of the structural assumptions, in a deterministic order.
/// An empty result means [`Cgs::from_raw`] succeeds.
pub fn validate_cgs(raw: &RawModel) -> Vec<Violation> {
    match build(raw) {
        Ok(_) => Vec::new(),
        Err(v) => v,
    }
}

fn index_names<T: Copy>(
    names: &[String],
    namespace: &str,
    mk: impl Fn(usize) -> T,
    out: &mut Vec<Violation>,
) -> HashMap<String, T> {
    if names.is_empty() && namespace != "atom" {
        out.push(Violation::EmptyNamespace {
            namespace: namespace.to_string(),
        });
    }
    let mut ix = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if ix.insert(n.clone(), mk(i)).is_some() {
            out.push(Violation::DuplicateLabel {
                namespace: namespace.to_string(),
                label: n.clone(),
            });
        }
    }
    ix
}

fn unknown(namespace: &str, name: &str, location: String) -> Violation {
    Violation::UnknownIdentifier {
        namespace: namespace.to_string(),
        name: name.to_string(),
        location,
    }
}

fn render_joint(action: &BTreeMap<String, String>, agents: &[String]) -> String {
    let mut parts = Vec::new();
    for a in agents {
        if let Some(c) = action.get(a) {
            parts.push(format!("{a}={c}"));
        }
    }
    for (a, c) in action {
        if !agents.contains(a) {
            parts.push(format!("{a}={c}"));
        }
    }
    format!("{{{}}}", parts.join(","))
}

pub(super) fn build(raw: &RawModel) -> Result<Cgs, Vec<Violation>> {
    let mut out = Vec::new();
    let state_names: Vec<String> = raw.states.iter().map(|s| s.id.clone()).collect();
    let agent_ix = index_names(&raw.agents, "agent", AgentId, &mut out);
    let action_ix = index_names(&raw.actions, "action", ActionId, &mut out);
    let atom_ix = index_names(&raw.atoms, "atom", AtomId, &mut out);
    let state_ix = index_names(&state_names, "state", StateId, &mut out);
    let n = state_names.len();
    let m = raw.agents.len();

    let mut labels = vec![BTreeSet::new(); n];
    for (i, st) in raw.states.iter().enumerate() {
        for p in &st.atoms {
            match atom_ix.get(p) {
                Some(&id) => {
                    labels[i].insert(id);
                }
                None => out.push(unknown("atom", p, format!("states[{}].atoms", st.id))),
            }
        }
    }

    // legality
    let mut legality: Vec<Vec<Vec<ActionId>>> = vec![vec![Vec::new(); m]; n];
    for (sname, per_agent) in &raw.legality {
        let Some(&s) = state_ix.get(sname) else {
            out.push(unknown("state", sname, "legality".to_string()));
            continue;
        };
        for (aname, acts) in per_agent {
            let Some(&a) = agent_ix.get(aname) else {
                out.push(unknown("agent", aname, format!("legality[{sname}]")));
                continue;
            };
            let mut set = BTreeSet::new();
            for c in acts {
                match action_ix.get(c) {
                    Some(&id) => {
                        set.insert(id);
                    }
                    None => out.push(unknown("action", c, format!("legality[{sname}][{aname}]"))),
                }
            }
            legality[s.0][a.0] = set.into_iter().collect();
        }
    }
    let mut legality_ok = true;
    for (s, sname) in state_names.iter().enumerate() {
        for (a, aname) in raw.agents.iter().enumerate() {
            let given = raw
                .legality
                .get(sname)
                .is_some_and(|pa| pa.contains_key(aname));
            if !given {
                legality_ok = false;
                out.push(Violation::MissingLegality {
                    state: sname.clone(),
                    agent: aname.clone(),
                });
            } else if legality[s][a].is_empty() {
                legality_ok = false;
                out.push(Violation::EmptyLegality {
                    state: sname.clone(),
                    agent: aname.clone(),
                });
            }
        }
    }

    // observation partitions
    let mut observation: Vec<Partition> = (0..m).map(|_| Partition::identity(n)).collect();
    for (aname, classes) in &raw.observation {
        let Some(&a) = agent_ix.get(aname) else {
            out.push(unknown("agent", aname, "observation".to_string()));
            continue;
        };
        let mut seen = vec![false; n];
        let mut resolved: Vec<Vec<StateId>> = Vec::new();
        let mut ok = true;
        for (k, class) in classes.iter().enumerate() {
            if class.is_empty() {
                ok = false;
                out.push(Violation::EmptyObservationClass {
                    agent: aname.clone(),
                    class: k,
                });
                continue;
            }
            let mut members = Vec::new();
            for sname in class {
                match state_ix.get(sname) {
                    Some(&s) => {
                        if seen[s.0] {
                            ok = false;
                            out.push(Violation::ObservationOverlap {
                                agent: aname.clone(),
                                state: sname.clone(),
                            });
                        } else {
                            seen[s.0] = true;
                            members.push(s);
                        }
                    }
                    None => {
                        ok = false;
                        out.push(unknown("state", sname, format!("observation[{aname}][{k}]")));
                    }
                }
            }
            if !members.is_empty() {
                resolved.push(members);
            }
        }
        for (s, covered) in seen.iter().enumerate() {
            if !covered {
                ok = false;
                out.push(Violation::ObservationUncovered {
                    agent: aname.clone(),
                    state: state_names[s].clone(),
                });
            }
        }
        if ok {
            observation[a.0] = Partition::from_classes(n, resolved);
        }
    }

    // uniformity: every member of a class shares the representative's legality
    for (a, part) in observation.iter().enumerate() {
        for class in part.classes() {
            let rep = class[0];
            for &s in &class[1..] {
                if legality[s.0][a] != legality[rep.0][a] {
                    out.push(Violation::UniformityBreach {
                        agent: raw.agents[a].clone(),
                        state: state_names[rep.0].clone(),
                        other: state_names[s.0].clone(),
                    });
                }
            }
        }
    }

    // transitions
    let mut transitions: Vec<BTreeMap<JointAction, Distribution<StateId>>> = vec![BTreeMap::new(); n];
    let mut defined: BTreeSet<(usize, JointAction)> = BTreeSet::new();
    for (i, tr) in raw.transitions.iter().enumerate() {
        let label = render_joint(&tr.action, &raw.agents);
        let location = format!("transitions[{i}] {} {label}", tr.state);
        let state = state_ix.get(&tr.state).copied();
        if state.is_none() {
            out.push(unknown("state", &tr.state, format!("transitions[{i}]")));
        }
        let mut components = vec![None; m];
        let mut resolved = true;
        for (aname, cname) in &tr.action {
            let agent = agent_ix.get(aname);
            let action = action_ix.get(cname);
            if agent.is_none() {
                out.push(unknown("agent", aname, location.clone()));
            }
            if action.is_none() {
                out.push(unknown("action", cname, location.clone()));
            }
            match (agent, action) {
                (Some(a), Some(c)) => components[a.0] = Some(*c),
                _ => resolved = false,
            }
        }
        for (a, comp) in components.iter().enumerate() {
            if comp.is_none() {
                resolved = false;
            }
            if comp.is_none() && !tr.action.contains_key(&raw.agents[a]) {
                out.push(Violation::IncompleteJointAction {
                    location: location.clone(),
                    agent: raw.agents[a].clone(),
                });
            }
        }

        let mut entries = Vec::new();
        let mut probs_ok = true;
        for (tname, lit) in &tr.dist {
            let target = state_ix.get(tname).copied();
            if target.is_none() {
                probs_ok = false;
                out.push(unknown("state", tname, location.clone()));
            }
            let p = match lit {
                ProbLiteral::Number(num) => {
                    probs_ok = false;
                    out.push(Violation::InvalidProbability {
                        location: location.clone(),
                        literal: num.to_string(),
                        reason: "numeric literal; write probabilities as \"num/den\" strings".into(),
                    });
                    continue;
                }
                ProbLiteral::Text(text) => match text.parse::<Rational>() {
                    Ok(p) if p.is_probability() => p,
                    Ok(_) => {
                        probs_ok = false;
                        out.push(Violation::InvalidProbability {
                            location: location.clone(),
                            literal: text.clone(),
                            reason: "outside [0,1]".into(),
                        });
                        continue;
                    }
                    Err(e) => {
                        probs_ok = false;
                        out.push(Violation::InvalidProbability {
                            location: location.clone(),
                            literal: text.clone(),
                            reason: e.to_string(),
                        });
                        continue;
                    }
                },
            };
            if let Some(t) = target {
                entries.push((t, p));
            }
        }
        if probs_ok {
            let total: Rational = entries.iter().map(|(_, p)| p).sum();
            if !total.is_one() {
                probs_ok = false;
                out.push(Violation::DistributionSum {
                    state: tr.state.clone(),
                    action: label.clone(),
                    total: total.to_string(),
                });
            }
        }

        let (Some(s), true) = (state, resolved) else { continue };
        let ja = JointAction(components.into_iter().map(|c| c.expect("resolved")).collect());
        if ja.0.iter().enumerate().any(|(a, c)| !legality[s.0][a].contains(c)) {
            out.push(Violation::IllegalTransition {
                state: tr.state.clone(),
                action: label,
            });
            continue;
        }
        if !defined.insert((s.0, ja.clone())) {
            out.push(Violation::DuplicateTransition {
                state: tr.state.clone(),
                action: label,
            });
            continue;
        }
        if probs_ok {
            let dist = Distribution::new(entries).expect("checked above");
            transitions[s.0].insert(ja, dist);
        }
    }

    // seriality: every legal joint action has a distribution
    if legality_ok {
        for s in 0..n {
            let choices: Vec<&[ActionId]> = legality[s].iter().map(|v| v.as_slice()).collect();
            for joint in cartesian(&choices) {
                let ja = JointAction(joint);
                if !defined.contains(&(s, ja.clone())) {
                    let pretty: BTreeMap<String, String> = ja
                        .0
                        .iter()
                        .enumerate()
                        .map(|(a, c)| (raw.agents[a].clone(), raw.actions[c.0].clone()))
                        .collect();
                    out.push(Violation::MissingTransition {
                        state: state_names[s].clone(),
                        action: render_joint(&pretty, &raw.agents),
                    });
                }
            }
        }
    }

    if !out.is_empty() {
        return Err(out);
    }
    Ok(Cgs {
        agents: raw.agents.clone(),
        actions: raw.actions.clone(),
        atoms: raw.atoms.clone(),
        states: state_names,
        agent_ix,
        action_ix,
        atom_ix,
        state_ix,
        labels,
        legality,
        transitions,
        observation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RawState, RawTransition};

    fn minimal() -> RawModel {
        RawModel {
            agents: vec!["a".into()],
            actions: vec!["x".into()],
            atoms: vec![],
            states: vec![RawState {
                id: "s".into(),
                atoms: vec![],
            }],
            legality: [("s".to_string(), [("a".to_string(), vec!["x".to_string()])].into())].into(),
            observation: BTreeMap::new(),
            transitions: vec![RawTransition {
                state: "s".into(),
                action: [("a".to_string(), "x".to_string())].into(),
                dist: [("s".to_string(), ProbLiteral::text("1"))].into(),
            }],
        }
    }

    #[test]
    fn minimal_model_is_valid() {
        assert_eq!(validate_cgs(&minimal()), vec![]);
    }

    #[test]
    fn uniformity_breach_is_reported_once() {
        let text = r#"{
            "agents": ["a"], "actions": ["y", "n"],
            "states": [{"id": "s"}, {"id": "t"}],
            "legality": {"s": {"a": ["y"]}, "t": {"a": ["y", "n"]}},
            "observation": {"a": [["s", "t"]]},
            "transitions": [
                {"state": "s", "action": {"a": "y"}, "dist": {"s": "1"}},
                {"state": "t", "action": {"a": "y"}, "dist": {"t": "1"}},
                {"state": "t", "action": {"a": "n"}, "dist": {"t": "1"}}
            ]
        }"#;
        let v = validate_cgs(&RawModel::from_json(text).unwrap());
        assert_eq!(
            v,
            vec![Violation::UniformityBreach {
                agent: "a".into(),
                state: "s".into(),
                other: "t".into()
            }]
        );
    }

    #[test]
    fn sum_violation_reports_total() {
        let mut raw = minimal();
        raw.states.push(RawState {
            id: "t".into(),
            atoms: vec![],
        });
        raw.legality
            .insert("t".into(), [("a".to_string(), vec!["x".to_string()])].into());
        raw.transitions.push(RawTransition {
            state: "t".into(),
            action: [("a".to_string(), "x".to_string())].into(),
            dist: [("t".to_string(), ProbLiteral::text("9/10"))].into(),
        });
        let v = validate_cgs(&raw);
        assert_eq!(
            v,
            vec![Violation::DistributionSum {
                state: "t".into(),
                action: "{a=x}".into(),
                total: "9/10".into()
            }]
        );
    }

    #[test]
    fn numeric_literals_are_rejected() {
        let text = r#"{
            "agents": ["a"], "actions": ["x"],
            "states": [{"id": "s"}],
            "legality": {"s": {"a": ["x"]}},
            "transitions": [{"state": "s", "action": {"a": "x"}, "dist": {"s": 1.0}}]
        }"#;
        let v = validate_cgs(&RawModel::from_json(text).unwrap());
        assert!(matches!(v.as_slice(), [Violation::InvalidProbability { .. }]));
    }

    #[test]
    fn unresolved_names_are_violations() {
        let mut raw = minimal();
        raw.transitions[0].dist = [("nowhere".to_string(), ProbLiteral::text("1"))].into();
        raw.observation.insert("ghost".into(), vec![vec!["s".into()]]);
        let v = validate_cgs(&raw);
        assert!(v.iter().any(|x| matches!(x, Violation::UnknownIdentifier { name, .. } if name == "nowhere")));
        assert!(v.iter().any(|x| matches!(x, Violation::UnknownIdentifier { name, .. } if name == "ghost")));
    }

    #[test]
    fn broken_partitions() {
        let mut raw = minimal();
        raw.states.push(RawState {
            id: "t".into(),
            atoms: vec![],
        });
        raw.legality
            .insert("t".into(), [("a".to_string(), vec!["x".to_string()])].into());
        raw.transitions.push(RawTransition {
            state: "t".into(),
            action: [("a".to_string(), "x".to_string())].into(),
            dist: [("s".to_string(), ProbLiteral::text("1"))].into(),
        });
        assert_eq!(validate_cgs(&raw), vec![]);

        raw.observation.insert("a".into(), vec![vec!["s".into()]]);
        assert_eq!(
            validate_cgs(&raw),
            vec![Violation::ObservationUncovered {
                agent: "a".into(),
                state: "t".into()
            }]
        );
        raw.observation
            .insert("a".into(), vec![vec!["s".into(), "t".into()], vec!["t".into()]]);
        assert_eq!(
            validate_cgs(&raw),
            vec![Violation::ObservationOverlap {
                agent: "a".into(),
                state: "t".into()
            }]
        );
        raw.observation.insert("a".into(), vec![vec!["s".into(), "t".into()], vec![]]);
        assert!(matches!(
            validate_cgs(&raw).as_slice(),
            [Violation::EmptyObservationClass { .. }]
        ));
    }

    #[test]
    fn missing_and_illegal_transitions() {
        let mut raw = minimal();
        raw.actions.push("z".into());
        raw.legality
            .insert("s".into(), [("a".to_string(), vec!["x".to_string(), "z".to_string()])].into());
        assert!(matches!(
            validate_cgs(&raw).as_slice(),
            [Violation::MissingTransition { .. }]
        ));
        let mut raw = minimal();
        raw.actions.push("z".into());
        raw.transitions.push(RawTransition {
            state: "s".into(),
            action: [("a".to_string(), "z".to_string())].into(),
            dist: [("s".to_string(), ProbLiteral::text("1"))].into(),
        });
        assert!(matches!(
            validate_cgs(&raw).as_slice(),
            [Violation::IllegalTransition { .. }]
        ));
    }

    #[test]
    fn empty_legality_and_duplicates() {
        let mut raw = minimal();
        raw.legality.insert("s".into(), [("a".to_string(), vec![])].into());
        let v = validate_cgs(&raw);
        assert!(v.iter().any(|x| matches!(x, Violation::EmptyLegality { .. })));

        let mut raw = minimal();
        raw.transitions.push(raw.transitions[0].clone());
        assert!(matches!(
            validate_cgs(&raw).as_slice(),
            [Violation::DuplicateTransition { .. }]
        ));

        let mut raw = minimal();
        raw.agents.push("a".into());
        assert!(validate_cgs(&raw)
            .iter()
            .any(|x| matches!(x, Violation::DuplicateLabel { .. })));
    }
}
