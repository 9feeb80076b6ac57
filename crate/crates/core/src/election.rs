//! Online approval election: candidates are interviewed one at a time and
//! voters decide by a simultaneous yes/no vote whether to put the current
//! candidate on the committee.
//!
//! A state records the preference profile in force, the candidate under
//! interview (if any) and each candidate's status. Unanimous votes decide
//! with certainty; a split vote selects with a configured probability. The
//! play ends once the committee is full or no candidate is left pending.
//!
//! Voters see their own preferences, the current interview and all statuses.
//! They do not see other voters' preferences, and the next candidate is drawn
//! only when moving on. Preferences are fixed for the whole play.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Cgs, ProbLiteral, RawModel, RawState, RawTransition};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arrival {
    /// Candidates in index order.
    Fixed,
    /// The next candidate is uniform among those not yet interviewed.
    Uniform,
}

#[derive(Clone, Debug)]
pub struct ElectionConfig {
    pub candidates: usize,
    pub committee: usize,
    pub voters: usize,
    /// Preference profiles, each `[voter][candidate]`. With more than one,
    /// a profile is drawn uniformly at the start of the play.
    pub profiles: Vec<Vec<Vec<bool>>>,
    /// Selection probability after a split vote unless overridden.
    pub split_default: Rational,
    /// Per-candidate, per-vote overrides; the vote is written as `y`/`n`
    /// letters in voter order, e.g. `(1, "yn")`. Candidates count from 1.
    pub split_overrides: BTreeMap<(usize, String), Rational>,
    pub arrival: Arrival,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ElectionError {
    #[error("need at least one candidate")]
    NoCandidates,
    #[error("need at least one voter")]
    NoVoters,
    #[error("committee size must be at least 1")]
    EmptyCommittee,
    #[error("committee size {committee} exceeds the {candidates} candidates")]
    CommitteeTooLarge { committee: usize, candidates: usize },
    #[error("split-vote probability {0} must lie strictly between 0 and 1")]
    SplitProbability(String),
    #[error("need at least one preference profile")]
    NoProfiles,
    #[error("preference profile {0} is not a voters x candidates matrix")]
    ProfileShape(usize),
    #[error("override `{0}`: {1}")]
    Override(String, String),
}

impl ElectionConfig {
    /// Voter `i` likes candidate `i mod m`; split votes select with 1/2.
    pub fn new(candidates: usize, committee: usize, voters: usize) -> Self {
        let likes = (0..voters)
            .map(|a| (0..candidates.max(1)).map(|j| j == a % candidates.max(1)).collect())
            .collect();
        ElectionConfig {
            candidates,
            committee,
            voters,
            profiles: vec![likes],
            split_default: Rational::new(1, 2),
            split_overrides: BTreeMap::new(),
            arrival: Arrival::Fixed,
        }
    }

    pub fn validate(&self) -> Result<(), ElectionError> {
        let (m, k, n) = (self.candidates, self.committee, self.voters);
        if m == 0 {
            return Err(ElectionError::NoCandidates);
        }
        if n == 0 {
            return Err(ElectionError::NoVoters);
        }
        if k == 0 {
            return Err(ElectionError::EmptyCommittee);
        }
        if k > m {
            return Err(ElectionError::CommitteeTooLarge { committee: k, candidates: m });
        }
        let inside = |p: &Rational| p.is_positive() && p < &Rational::one();
        if !inside(&self.split_default) {
            return Err(ElectionError::SplitProbability(self.split_default.to_string()));
        }
        if self.profiles.is_empty() {
            return Err(ElectionError::NoProfiles);
        }
        for (i, p) in self.profiles.iter().enumerate() {
            if p.len() != n || p.iter().any(|row| row.len() != m) {
                return Err(ElectionError::ProfileShape(i));
            }
        }
        for ((j, votes), p) in &self.split_overrides {
            let key = format!("{j}:{votes}");
            if *j == 0 || *j > m {
                return Err(ElectionError::Override(key, "no such candidate".into()));
            }
            if votes.len() != n || votes.chars().any(|c| c != 'y' && c != 'n') {
                return Err(ElectionError::Override(key, format!("expected {n} letters y/n")));
            }
            if !votes.contains('y') || !votes.contains('n') {
                return Err(ElectionError::Override(key, "vote is unanimous".into()));
            }
            if !inside(p) {
                return Err(ElectionError::SplitProbability(p.to_string()));
            }
        }
        Ok(())
    }

    fn split(&self, candidate: usize, votes: &str) -> Rational {
        self.split_overrides
            .get(&(candidate + 1, votes.to_string()))
            .cloned()
            .unwrap_or_else(|| self.split_default.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Status {
    Pending,
    Selected,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    Start,
    Play {
        profile: usize,
        interview: Option<usize>,
        status: Vec<Status>,
    },
}

pub fn voter_name(a: usize) -> String {
    format!("v{}", a + 1)
}

pub fn likes_atom(a: usize, j: usize) -> String {
    format!("likes_{}_{}", voter_name(a), j + 1)
}

fn status_string(status: &[Status]) -> String {
    status
        .iter()
        .map(|s| match s {
            Status::Pending => '.',
            Status::Selected => 's',
            Status::Rejected => 'r',
        })
        .collect()
}

fn node_name(cfg: &ElectionConfig, node: &Node) -> String {
    match node {
        Node::Start => "start".into(),
        Node::Play {
            profile,
            interview,
            status,
        } => {
            let mut out = String::new();
            if cfg.profiles.len() > 1 {
                let _ = write!(out, "pf{profile}:");
            }
            match interview {
                Some(j) => {
                    let _ = write!(out, "int{}", j + 1);
                }
                None => out.push_str("done"),
            }
            let _ = write!(out, "[{}]", status_string(status));
            out
        }
    }
}

/// Where the play goes once statuses are updated: the next interview
/// (distribution) or the terminal state.
fn continue_from(cfg: &ElectionConfig, profile: usize, status: Vec<Status>) -> Vec<(Node, Rational)> {
    let selected = status.iter().filter(|s| **s == Status::Selected).count();
    let pending: Vec<usize> = (0..status.len()).filter(|&j| status[j] == Status::Pending).collect();
    if selected == cfg.committee || pending.is_empty() {
        return vec![(
            Node::Play {
                profile,
                interview: None,
                status,
            },
            Rational::one(),
        )];
    }
    let next: Vec<usize> = match cfg.arrival {
        Arrival::Fixed => vec![pending[0]],
        Arrival::Uniform => pending,
    };
    let w = Rational::new(1, next.len() as i64);
    next.into_iter()
        .map(|j| {
            (
                Node::Play {
                    profile,
                    interview: Some(j),
                    status: status.clone(),
                },
                w.clone(),
            )
        })
        .collect()
}

fn initial(cfg: &ElectionConfig) -> Vec<(Node, Rational)> {
    let fresh = vec![Status::Pending; cfg.candidates];
    let wp = Rational::new(1, cfg.profiles.len() as i64);
    (0..cfg.profiles.len())
        .flat_map(|p| {
            continue_from(cfg, p, fresh.clone())
                .into_iter()
                .map(|(node, w)| (node, &w * &wp))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn merge(entries: Vec<(Node, Rational)>) -> BTreeMap<Node, Rational> {
    let mut out: BTreeMap<Node, Rational> = BTreeMap::new();
    for (n, w) in entries {
        *out.entry(n).or_default() += w;
    }
    out
}

/// Successor distribution of an interview state under a vote.
fn vote_outcome(cfg: &ElectionConfig, profile: usize, j: usize, status: &[Status], votes: &str) -> BTreeMap<Node, Rational> {
    let p_select = if !votes.contains('n') {
        Rational::one()
    } else if !votes.contains('y') {
        Rational::zero()
    } else {
        cfg.split(j, votes)
    };
    let mut entries = Vec::new();
    for (verdict, w) in [(Status::Selected, p_select.clone()), (Status::Rejected, p_select.complement())] {
        if w.is_zero() {
            continue;
        }
        let mut st = status.to_vec();
        st[j] = verdict;
        for (node, q) in continue_from(cfg, profile, st) {
            entries.push((node, &w * &q));
        }
    }
    merge(entries)
}

/// Builds the game structure, exploring only reachable states.
pub fn election_raw(cfg: &ElectionConfig) -> Result<RawModel, ElectionError> {
    cfg.validate()?;
    let (m, n) = (cfg.candidates, cfg.voters);
    let agents: Vec<String> = (0..n).map(voter_name).collect();
    let actions = vec!["y".to_string(), "n".to_string()];
    let mut atoms = Vec::new();
    for j in 0..m {
        atoms.push(format!("interview_{}", j + 1));
        atoms.push(format!("selected_{}", j + 1));
        atoms.push(format!("rejected_{}", j + 1));
    }
    for a in 0..n {
        for j in 0..m {
            atoms.push(likes_atom(a, j));
        }
    }

    let start = initial(cfg);
    let root = if start.len() == 1 { start[0].0.clone() } else { Node::Start };
    let mut order = vec![root.clone()];
    let mut index: HashMap<Node, usize> = HashMap::from([(root.clone(), 0)]);
    let mut queue = VecDeque::from([root]);
    let mut edges: Vec<Vec<(String, BTreeMap<Node, Rational>)>> = Vec::new();
    let votes_all: Vec<String> = crate::model::cartesian(&vec![&['y', 'n'][..]; n])
        .into_iter()
        .map(|v| v.into_iter().collect())
        .collect();

    while let Some(node) = queue.pop_front() {
        let rows: Vec<(String, BTreeMap<Node, Rational>)> = votes_all
            .iter()
            .map(|votes| {
                let dist = match &node {
                    Node::Start => merge(start.clone()),
                    Node::Play {
                        profile,
                        interview: Some(j),
                        status,
                    } => vote_outcome(cfg, *profile, *j, status, votes),
                    Node::Play { interview: None, .. } => BTreeMap::from([(node.clone(), Rational::one())]),
                };
                (votes.clone(), dist)
            })
            .collect();
        for (_, dist) in &rows {
            for succ in dist.keys() {
                if !index.contains_key(succ) {
                    index.insert(succ.clone(), order.len());
                    order.push(succ.clone());
                    queue.push_back(succ.clone());
                }
            }
        }
        edges.push(rows);
    }

    let names: Vec<String> = order.iter().map(|s| node_name(cfg, s)).collect();
    let states = order
        .iter()
        .zip(&names)
        .map(|(node, name)| {
            let mut labels = Vec::new();
            if let Node::Play {
                profile,
                interview,
                status,
            } = node
            {
                for j in 0..m {
                    if *interview == Some(j) {
                        labels.push(format!("interview_{}", j + 1));
                    }
                    match status[j] {
                        Status::Selected => labels.push(format!("selected_{}", j + 1)),
                        Status::Rejected => labels.push(format!("rejected_{}", j + 1)),
                        Status::Pending => {}
                    }
                }
                for a in 0..n {
                    for j in 0..m {
                        if cfg.profiles[*profile][a][j] {
                            labels.push(likes_atom(a, j));
                        }
                    }
                }
            }
            RawState {
                id: name.clone(),
                atoms: labels,
            }
        })
        .collect();

    let mut legality = BTreeMap::new();
    for name in &names {
        legality.insert(
            name.clone(),
            agents.iter().map(|a| (a.clone(), actions.clone())).collect::<BTreeMap<_, _>>(),
        );
    }

    let mut transitions = Vec::new();
    for (s, rows) in edges.iter().enumerate() {
        for (votes, dist) in rows {
            transitions.push(RawTransition {
                state: names[s].clone(),
                action: agents
                    .iter()
                    .cloned()
                    .zip(votes.chars().map(|c| c.to_string()))
                    .collect(),
                dist: dist
                    .iter()
                    .map(|(t, p)| (names[index[t]].clone(), ProbLiteral::text(p.to_fraction_string())))
                    .collect(),
            });
        }
    }

    // A voter's view: own preferences, current interview and statuses.
    let mut observation = BTreeMap::new();
    for a in 0..n {
        let mut classes: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (node, name) in order.iter().zip(&names) {
            let key = match node {
                Node::Start => "start".to_string(),
                Node::Play {
                    profile,
                    interview,
                    status,
                } => {
                    let own: String = cfg.profiles[*profile][a].iter().map(|l| if *l { '1' } else { '0' }).collect();
                    format!("{own}|{interview:?}|{}", status_string(status))
                }
            };
            classes.entry(key).or_default().push(name.clone());
        }
        observation.insert(voter_name(a), classes.into_values().collect());
    }

    Ok(RawModel {
        agents,
        actions,
        atoms,
        states,
        legality,
        observation,
        transitions,
    })
}

pub fn election_model(cfg: &ElectionConfig) -> Result<Cgs, ElectionError> {
    let raw = election_raw(cfg)?;
    Ok(Cgs::from_raw(&raw).expect("generated election models are valid"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedFormula {
    pub name: String,
    pub text: String,
    /// False for formulas outside the checkable fragment.
    pub patl: bool,
    pub description: String,
}

/// Instances of the scenario's properties for the configured voters and
/// candidates. Coalition-level properties use the grand coalition and each
/// single voter.
pub fn election_formulas(cfg: &ElectionConfig) -> Vec<NamedFormula> {
    let (m, n) = (cfg.candidates, cfg.voters);
    let mut out = Vec::new();
    let coalitions: Vec<(String, Vec<usize>)> = std::iter::once(("*".to_string(), (0..n).collect()))
        .chain((0..n).filter(|_| n > 1).map(|a| (voter_name(a), vec![a])))
        .collect();
    for j in 1..=m {
        out.push(NamedFormula {
            name: format!("no-reselection-{j}"),
            text: format!("rejected_{j} -> !<<*>>{{>=1}} F selected_{j}"),
            patl: true,
            description: format!("no coalition can get candidate {j} selected once rejected"),
        });
    }
    for (label, members) in &coalitions {
        let some_liked: Vec<String> = members
            .iter()
            .map(|&a| {
                let alts: Vec<String> = (0..m).map(|j| format!("({} & F selected_{})", likes_atom(a, j), j + 1)).collect();
                format!("({})", alts.join(" | "))
            })
            .collect();
        out.push(NamedFormula {
            name: format!("some-liked-selected-{}", label.replace('*', "all")),
            text: format!("<<{label}>>{{>=1/2}} ({})", some_liked.join(" & ")),
            patl: false,
            description: "each member gets a liked candidate selected with probability at least 1/2".into(),
        });
        let all_liked: Vec<String> = members
            .iter()
            .flat_map(|&a| (0..m).map(move |j| format!("({} & F selected_{})", likes_atom(a, j), j + 1)))
            .collect();
        out.push(NamedFormula {
            name: format!("all-liked-selected-{}", label.replace('*', "all")),
            text: format!("<<{label}>>{{>=1/2}} ({})", all_liked.join(" & ")),
            patl: false,
            description: "all liked candidates get selected with probability at least 1/2".into(),
        });
    }
    for (label, _) in &coalitions {
        for j in 1..=m {
            out.push(NamedFormula {
                name: format!("next-selection-bound-{}-{j}", label.replace('*', "all")),
                text: format!("interview_{j} -> <<{label}>>{{<=1/4}} X selected_{j}"),
                patl: true,
                description: format!("probability of selecting candidate {j} in the next step is at most 1/4"),
            });
        }
    }
    out
}

/// Formula file: one formula per line, `#` comments. Formulas outside the
/// fragment are kept as comments so the file can be checked as is.
pub fn formulas_file(formulas: &[NamedFormula]) -> String {
    let mut out = String::new();
    for f in formulas {
        let _ = writeln!(out, "# {}: {}", f.name, f.description);
        if f.patl {
            let _ = writeln!(out, "{}", f.text);
        } else {
            let _ = writeln!(out, "# not PATL (conjunction of path formulas); not checkable:");
            let _ = writeln!(out, "# {}", f.text);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{desugar, is_patl, parse_formula};
    use crate::model::{validate_cgs, StateId};

    #[test]
    fn single_candidate_machine() {
        // int1[.] -> done[s] or done[r]
        let g = election_model(&ElectionConfig::new(1, 1, 1)).unwrap();
        assert_eq!(g.state_names(), &["int1[.]", "done[s]", "done[r]"]);
        let yes = crate::model::JointAction(vec![g.action_id("y").unwrap()]);
        let d = g.successors(StateId(0), &yes).unwrap();
        assert_eq!(d.as_dirac(), Some(&g.state_id("done[s]").unwrap()));
    }

    #[test]
    fn two_by_two_by_one() {
        let cfg = ElectionConfig::new(2, 1, 2);
        let raw = election_raw(&cfg).unwrap();
        assert!(validate_cgs(&raw).is_empty());
        let g = Cgs::from_raw(&raw).unwrap();
        assert_eq!(
            g.state_names(),
            &["int1[..]", "done[s.]", "int2[r.]", "done[rs]", "done[rr]"]
        );
        let y = g.action_id("y").unwrap();
        let n = g.action_id("n").unwrap();
        let split = g.successors(StateId(0), &crate::model::JointAction(vec![y, n])).unwrap();
        assert_eq!(split.prob(&g.state_id("done[s.]").unwrap()), Rational::new(1, 2));
        assert_eq!(split.prob(&g.state_id("int2[r.]").unwrap()), Rational::new(1, 2));
        let none = g.successors(StateId(0), &crate::model::JointAction(vec![n, n])).unwrap();
        assert_eq!(none.as_dirac(), Some(&g.state_id("int2[r.]").unwrap()));
    }

    #[test]
    fn overrides_and_uniform_arrival() {
        let mut cfg = ElectionConfig::new(2, 1, 2);
        cfg.arrival = Arrival::Uniform;
        cfg.split_overrides.insert((1, "yn".into()), Rational::new(3, 4));
        let g = election_model(&cfg).unwrap();
        let start = g.state_id("start").unwrap();
        let y = g.action_id("y").unwrap();
        let n = g.action_id("n").unwrap();
        let first = g.successors(start, &crate::model::JointAction(vec![y, y])).unwrap();
        assert_eq!(first.prob(&g.state_id("int1[..]").unwrap()), Rational::new(1, 2));
        let int1 = g.state_id("int1[..]").unwrap();
        let d = g.successors(int1, &crate::model::JointAction(vec![y, n])).unwrap();
        assert_eq!(d.prob(&g.state_id("done[s.]").unwrap()), Rational::new(3, 4));
        let d = g.successors(int1, &crate::model::JointAction(vec![n, y])).unwrap();
        assert_eq!(d.prob(&g.state_id("done[s.]").unwrap()), Rational::new(1, 2));
    }

    #[test]
    fn hidden_preferences_merge_states() {
        let mut cfg = ElectionConfig::new(2, 1, 2);
        cfg.profiles = vec![
            vec![vec![true, false], vec![true, false]],
            vec![vec![true, false], vec![false, true]],
        ];
        let g = election_model(&cfg).unwrap();
        let v1 = g.agent_id("v1").unwrap();
        let v2 = g.agent_id("v2").unwrap();
        let a = g.state_id("pf0:int1[..]").unwrap();
        let b = g.state_id("pf1:int1[..]").unwrap();
        assert_eq!(g.obs_class(v1, a), g.obs_class(v1, b));
        assert_ne!(g.obs_class(v2, a), g.obs_class(v2, b));
    }

    #[test]
    fn config_errors() {
        assert_eq!(
            ElectionConfig::new(1, 2, 1).validate(),
            Err(ElectionError::CommitteeTooLarge { committee: 2, candidates: 1 })
        );
        assert_eq!(ElectionConfig::new(2, 0, 1).validate(), Err(ElectionError::EmptyCommittee));
        let mut cfg = ElectionConfig::new(2, 1, 2);
        cfg.split_default = Rational::one();
        assert!(matches!(cfg.validate(), Err(ElectionError::SplitProbability(_))));
        let mut cfg = ElectionConfig::new(2, 1, 2);
        cfg.split_overrides.insert((1, "yy".into()), Rational::new(1, 3));
        assert!(matches!(cfg.validate(), Err(ElectionError::Override(..))));
    }

    #[test]
    fn formulas_classify() {
        let fs = election_formulas(&ElectionConfig::new(2, 1, 2));
        for f in &fs {
            let parsed = parse_formula(&f.text).unwrap_or_else(|e| panic!("{}: {e}", f.text));
            assert_eq!(is_patl(&desugar(&parsed)).0, f.patl, "{}", f.text);
        }
        assert!(fs.iter().any(|f| f.text == "rejected_1 -> !<<*>>{>=1} F selected_1"));
        assert!(fs.iter().any(|f| f.text == "interview_2 -> <<v1>>{<=1/4} X selected_2"));
        let file = formulas_file(&fs);
        let lines = crate::logic::parse_formula_lines(&file).unwrap();
        assert_eq!(lines.len(), fs.iter().filter(|f| f.patl).count());
    }

    #[test]
    fn terminal_states_absorb_and_statuses_never_revert() {
        let mut configs = vec![ElectionConfig::new(1, 1, 1), ElectionConfig::new(2, 1, 2), ElectionConfig::new(3, 2, 2)];
        let mut uniform = ElectionConfig::new(3, 2, 3);
        uniform.arrival = Arrival::Uniform;
        configs.push(uniform);
        let mut hidden = ElectionConfig::new(2, 1, 2);
        hidden.profiles.push(vec![vec![false, true], vec![true, true]]);
        configs.push(hidden);
        for cfg in &configs {
            let raw = election_raw(cfg).unwrap();
            assert!(validate_cgs(&raw).is_empty());
            let g = Cgs::from_raw(&raw).unwrap();
            let flags: Vec<_> = g
                .atom_names()
                .iter()
                .filter(|a| a.starts_with("selected_") || a.starts_with("rejected_"))
                .map(|a| g.atom_id(a).unwrap())
                .collect();
            for s in g.states() {
                let terminal = g.state_name(s).contains("done[");
                for d in g.transitions(s).values() {
                    if terminal {
                        assert_eq!(d.as_dirac(), Some(&s));
                    }
                    for t in d.support() {
                        for p in &flags {
                            assert!(!g.has_atom(s, *p) || g.has_atom(*t, *p), "{} -> {}", g.state_name(s), g.state_name(*t));
                        }
                    }
                }
            }
        }
    }
}
