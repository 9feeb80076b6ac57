//! Strategy profile files for simulation.
//!
//! ```json
//! {"a": {"s0": {"y": "1/2", "n": "1/2"}, "*": "y"}, "b": {"*": "n"}}
//! ```
//!
//! Keys are state names or `*` for every state not listed. A value is an
//! action name (point distribution) or a map from actions to probabilities.
//! Keys of the form `s0>s1` denote histories and are rejected.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::chain::Profile;
use super::OracleError;
use crate::model::{ActionId, AgentId, Cgs, Distribution};
use crate::rational::Rational;
use crate::strategy::MemorylessStrategy;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum RawChoice {
    Action(String),
    Mixed(BTreeMap<String, String>),
}

pub type RawProfile = BTreeMap<String, BTreeMap<String, RawChoice>>;

fn choice(cgs: &Cgs, raw: &RawChoice) -> Result<Distribution<ActionId>, OracleError> {
    let bad = |m: String| OracleError::Profile(m);
    match raw {
        RawChoice::Action(c) => Ok(Distribution::dirac(cgs.action_id(c).map_err(|e| bad(e.to_string()))?)),
        RawChoice::Mixed(m) => {
            let mut entries = Vec::new();
            for (c, p) in m {
                let id = cgs.action_id(c).map_err(|e| bad(e.to_string()))?;
                let p: Rational = p.parse().map_err(|e| bad(format!("probability `{p}`: {e}")))?;
                entries.push((id, p));
            }
            Distribution::new(entries).map_err(|e| bad(e.to_string()))
        }
    }
}

/// Resolves a raw profile against a model; every agent must be covered.
pub fn profile_from_raw(cgs: &Cgs, raw: &RawProfile) -> Result<Profile, OracleError> {
    for name in raw.keys() {
        cgs.agent_id(name).map_err(|e| OracleError::Profile(e.to_string()))?;
    }
    let mut strategies = Vec::with_capacity(cgs.num_agents());
    for a in cgs.agents() {
        let name = cgs.agent_name(a);
        let table = raw
            .get(name)
            .ok_or_else(|| OracleError::Profile(format!("no strategy for agent `{name}`")))?;
        if let Some(k) = table.keys().find(|k| k.contains('>')) {
            return Err(OracleError::NotMemoryless(format!("agent `{name}` has history key `{k}`")));
        }
        for k in table.keys().filter(|k| k.as_str() != "*") {
            cgs.state_id(k).map_err(|e| OracleError::Profile(e.to_string()))?;
        }
        let default = table.get("*").map(|c| choice(cgs, c)).transpose()?;
        let mut per_state = Vec::with_capacity(cgs.num_states());
        for s in cgs.states() {
            let d = match table.get(cgs.state_name(s)) {
                Some(c) => choice(cgs, c)?,
                None => default.clone().ok_or_else(|| {
                    OracleError::Profile(format!("agent `{name}` has no choice at `{}`", cgs.state_name(s)))
                })?,
            };
            per_state.push(d);
        }
        let st = MemorylessStrategy {
            agent: AgentId(a.0),
            choice: per_state,
        };
        if !st.respects_legality(cgs) {
            return Err(OracleError::Profile(format!("agent `{name}` plays an illegal action")));
        }
        strategies.push(st);
    }
    Ok(Profile { strategies })
}

pub fn parse_profile(cgs: &Cgs, text: &str) -> Result<Profile, OracleError> {
    let raw: RawProfile = serde_json::from_str(text).map_err(|e| OracleError::Profile(e.to_string()))?;
    profile_from_raw(cgs, &raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StateId;
    use crate::oracle::induced_chain;

    fn game() -> Cgs {
        Cgs::from_json(
            r#"{
            "agents": ["a", "b"], "actions": ["h", "t"],
            "states": [{"id": "s"}, {"id": "hh"}, {"id": "ht"}, {"id": "th"}, {"id": "tt"}],
            "legality": {
                "s": {"a": ["h", "t"], "b": ["h", "t"]},
                "hh": {"a": ["h"], "b": ["h"]}, "ht": {"a": ["h"], "b": ["h"]},
                "th": {"a": ["h"], "b": ["h"]}, "tt": {"a": ["h"], "b": ["h"]}
            },
            "transitions": [
                {"state": "s", "action": {"a": "h", "b": "h"}, "dist": {"hh": "1"}},
                {"state": "s", "action": {"a": "h", "b": "t"}, "dist": {"ht": "1"}},
                {"state": "s", "action": {"a": "t", "b": "h"}, "dist": {"th": "1"}},
                {"state": "s", "action": {"a": "t", "b": "t"}, "dist": {"tt": "1"}},
                {"state": "hh", "action": {"a": "h", "b": "h"}, "dist": {"hh": "1"}},
                {"state": "ht", "action": {"a": "h", "b": "h"}, "dist": {"ht": "1"}},
                {"state": "th", "action": {"a": "h", "b": "h"}, "dist": {"th": "1"}},
                {"state": "tt", "action": {"a": "h", "b": "h"}, "dist": {"tt": "1"}}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn two_coins_give_quarters() {
        let g = game();
        let p = parse_profile(
            &g,
            r#"{"a": {"s": {"h": "1/2", "t": "1/2"}, "*": "h"}, "b": {"s": {"h": "1/2", "t": "1/2"}, "*": "h"}}"#,
        )
        .unwrap();
        let mc = induced_chain(&g, &p).unwrap();
        let row = mc.row(StateId(0));
        for t in 1..5 {
            assert_eq!(row.prob(&StateId(t)), Rational::new(1, 4));
        }
    }

    #[test]
    fn dirac_profile_gives_deterministic_chain() {
        let g = game();
        let p = parse_profile(&g, r#"{"a": {"*": "h"}, "b": {"s": "t", "*": "h"}}"#).unwrap();
        let mc = induced_chain(&g, &p).unwrap();
        assert!(mc.rows().iter().all(|r| r.as_dirac().is_some()));
        assert_eq!(mc.row(StateId(0)).as_dirac(), Some(&StateId(2)));
    }

    #[test]
    fn rejections() {
        let g = game();
        assert!(matches!(
            parse_profile(&g, r#"{"a": {"s>hh": "h", "*": "h"}, "b": {"*": "h"}}"#),
            Err(OracleError::NotMemoryless(_))
        ));
        assert!(parse_profile(&g, r#"{"a": {"*": "h"}}"#).is_err());
        assert!(parse_profile(&g, r#"{"a": {"*": "t"}, "b": {"*": "h"}}"#).is_err());
        assert!(parse_profile(&g, r#"{"a": {"s": {"h": "0.5", "t": "1/2"}, "*": "h"}, "b": {"*": "h"}}"#).is_err());
    }
}
