//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always shown; exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use patl_core::checker::{check, replay_assignment, CheckOptions, CheckReport};
use patl_core::election::{election_formulas, election_model, ElectionConfig};
use patl_core::logic::{parse_formula, Coalition, Comparison, Formula};
use patl_core::mdp::{extremal_next, extremal_until, prob01, Extremum};
use patl_core::model::{Distribution, StateId};
use patl_core::oracle::random::{random_cgs, random_mdp, random_patl_formula, FormulaParams, RandomCgsParams};
use patl_core::oracle::{
    atl_ir_check, brute_force_check, chain_until_probability, sample_chain, MarkovChain, PathGoal, SampleOptions,
    DEFAULT_LIMIT,
};
use patl_core::{Cgs, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn load(name: &str) -> Cgs {
    Cgs::load(&models().join(name)).unwrap()
}

fn within(started: Instant, budget: Duration, detail: String) -> Outcome {
    let spent = started.elapsed();
    if spent <= budget {
        Ok(format!("{detail} ({:.2} s, budget {} s)", spent.as_secs_f64(), budget.as_secs()))
    } else {
        Err(format!("{detail} but took {:.2} s, budget {} s", spent.as_secs_f64(), budget.as_secs()))
    }
}

fn params(g: &Cgs, max_depth: usize, qualitative: bool) -> FormulaParams {
    FormulaParams {
        agents: g.agent_names().to_vec(),
        atoms: g.atom_names().to_vec(),
        max_depth,
        qualitative,
    }
}

fn dirac_reduction() -> Outcome {
    let started = Instant::now();
    let mut cases: Vec<(Cgs, Formula)> = Vec::new();
    let maze = load("maze.json");
    for text in [
        "<<1>>{>=1} F p",
        "<<2>>{>=1} F p",
        "<<1,2>>{>=1} X p",
        "<<>>{>=1} G !p",
        "<<2>>{>=1} G !p",
        "<<1>>{>=1} (!p U p)",
        "<<1>>{>=1} X <<2>>{>=1} F p",
    ] {
        cases.push((maze.clone(), parse_formula(text).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let dirac = RandomCgsParams {
        max_states: 6,
        dirac: true,
        ..RandomCgsParams::default()
    };
    for _ in 0..40 {
        let g = random_cgs(&mut rng, &dirac);
        let f = random_patl_formula(&mut rng, &params(&g, 2, true));
        cases.push((g, f));
    }
    for (i, (g, f)) in cases.iter().enumerate() {
        let got = check(g, f, &CheckOptions::default()).map_err(|e| e.to_string())?;
        let want = atl_ir_check(g, f).map_err(|e| e.to_string())?;
        if got.root_holds() != want.as_slice() {
            return Err(format!("case {i} `{f}`: checker {:?}, classical {:?}", got.root_holds(), want));
        }
    }
    within(
        started,
        Duration::from_secs(10),
        format!("{} deterministic models agree with classical ATL", cases.len()),
    )
}

fn fuzz_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let mut states = 0;
    for i in 0..500 {
        let g = random_cgs(&mut rng, &RandomCgsParams::default());
        let f = random_patl_formula(&mut rng, &params(&g, 2, false));
        let got = check(&g, &f, &CheckOptions::default()).map_err(|e| e.to_string())?;
        let want = brute_force_check(&g, &f, DEFAULT_LIMIT).map_err(|e| e.to_string())?;
        if got.root_holds() != want.as_slice() {
            return Err(format!("instance {i} `{f}` disagrees"));
        }
        states += g.num_states();
    }
    within(
        started,
        Duration::from_secs(300),
        format!("500 instances, {states} state verdicts, 100% agreement"),
    )
}

fn witness_value(report: &CheckReport, state: &str) -> Option<String> {
    let st = report.root().strategic.as_ref()?;
    st.witnesses.iter().find(|w| w.state == state).map(|w| w.value.clone())
}

fn exact_solves() -> Outcome {
    // x = 1/3 + x/3 and x = 1/2 + x/2, solved by hand.
    let cases = [("coin.json", Rational::new(1, 2)), ("retry.json", Rational::one())];
    let mut seen = Vec::new();
    for (file, want) in cases {
        let g = load(file);
        let at_least = check(&g, &parse_formula(&format!("<<>>{{>={want}}} F goal")).unwrap(), &CheckOptions::default())
            .map_err(|e| e.to_string())?;
        let value: Rational = witness_value(&at_least, "s")
            .ok_or(format!("{file}: no witness at s"))?
            .parse()
            .map_err(|e| format!("{e}"))?;
        if value != want {
            return Err(format!("{file}: value {value}, expected {want}"));
        }
        let above = check(&g, &parse_formula(&format!("<<>>{{>{want}}} F goal")).unwrap(), &CheckOptions::default())
            .map_err(|e| e.to_string())?;
        if above.holds_at(StateId(0)) {
            return Err(format!("{file}: strict comparison above {want} holds"));
        }
        seen.push(format!("{file} = {value}"));
    }
    Ok(format!("{} exactly", seen.join(", ")))
}

fn reachable(g: &Cgs, from: StateId) -> Vec<bool> {
    let mut seen = vec![false; g.num_states()];
    let mut stack = vec![from];
    seen[from.0] = true;
    while let Some(s) = stack.pop() {
        for d in g.transitions(s).values() {
            for t in d.support() {
                if !seen[t.0] {
                    seen[t.0] = true;
                    stack.push(*t);
                }
            }
        }
    }
    seen
}

fn election_scenario() -> Outcome {
    let started = Instant::now();
    let cfg = ElectionConfig::new(2, 1, 2);
    let g = election_model(&cfg).map_err(|e| e.to_string())?;
    let live = reachable(&g, StateId(0));
    let formulas = election_formulas(&cfg);
    let mut checked = 0;
    for nf in formulas.iter().filter(|f| f.patl) {
        let f = parse_formula(&nf.text).map_err(|e| e.to_string())?;
        let got = check(&g, &f, &CheckOptions::default()).map_err(|e| e.to_string())?;
        let want = brute_force_check(&g, &f, DEFAULT_LIMIT).map_err(|e| e.to_string())?;
        if got.root_holds() != want.as_slice() {
            return Err(format!("`{}`: checker and oracle disagree", nf.text));
        }
        if nf.name.starts_with("no-reselection") && !g.states().filter(|s| live[s.0]).all(|s| want[s.0]) {
            return Err(format!("`{}` fails at a reachable state", nf.text));
        }
        checked += 1;
    }
    let single_voter = formulas
        .iter()
        .filter(|f| f.text.contains("<<v1>>{<=1/4} X") || f.text.contains("<<v2>>{<=1/4} X"))
        .count();
    if single_voter == 0 {
        return Err("no single-voter next-step formula generated".into());
    }
    within(
        started,
        Duration::from_secs(30),
        format!(
            "{} states; no-reselection holds on all reachable states; {checked} formulas agree with the oracle ({single_voter} single-voter)",
            g.num_states()
        ),
    )
}

fn invariant_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mdps = 0;
    for _ in 0..400 {
        let n = rng.gen_range(1..=7);
        let m = random_mdp(&mut rng, n, 3);
        let safe: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
        let target: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
        let lo = extremal_until(&m, &safe, &target, Extremum::Min);
        let hi = extremal_until(&m, &safe, &target, Extremum::Max);
        if (0..n).any(|s| lo.values[s] > hi.values[s]) {
            return Err(format!("mdp {mdps}: min above max"));
        }
        for (mode, sol) in [(Extremum::Min, &lo), (Extremum::Max, &hi)] {
            let q = prob01(&m, &safe, &target, mode);
            for s in 0..n {
                let v = &sol.values[s];
                let ok = if q.zero[s] {
                    v.is_zero()
                } else if q.one[s] {
                    v.is_one()
                } else {
                    v.is_positive() && *v < Rational::one()
                };
                if !ok {
                    return Err(format!("mdp {mdps}: state {s} value {v} contradicts the 0/1 regions"));
                }
            }
            let rows = (0..n).map(|s| m.moves(StateId(s))[sol.policy[s]].dist.clone()).collect();
            if chain_until_probability(&MarkovChain::new(rows), &safe, &target) != sol.values {
                return Err(format!("mdp {mdps}: reported policy does not reproduce the values"));
            }
        }
        let complement: Vec<bool> = target.iter().map(|t| !t).collect();
        let min_next = extremal_next(&m, &target, Extremum::Min).values;
        let max_next = extremal_next(&m, &complement, Extremum::Max).values;
        if (0..n).any(|s| min_next[s] != max_next[s].complement()) {
            return Err(format!("mdp {mdps}: next complementation fails"));
        }
        mdps += 1;
    }

    let mut games = 0;
    let mut witnesses = 0;
    for _ in 0..200 {
        let g = random_cgs(&mut rng, &RandomCgsParams { agents: 3, ..RandomCgsParams::default() });
        let f = random_patl_formula(&mut rng, &params(&g, 1, false));
        let mut root = f.clone();
        let st = loop {
            match root {
                Formula::Strategic(st) => break *st,
                Formula::Not(x) | Formula::Or(x, _) => root = *x,
                _ => unreachable!("generated formulas carry a modality"),
            }
        };
        let cmp = *[Comparison::Le, Comparison::Lt, Comparison::Gt, Comparison::Ge].choose(&mut rng).unwrap();
        let small: Vec<String> = g.agent_names().iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        let mut large = small.clone();
        large.push(g.agent_names().choose(&mut rng).unwrap().clone());
        let build = |c: &[String]| Formula::strategic(Coalition::of(c.iter().cloned()), cmp, st.threshold.clone(), st.path.clone());
        let a = check(&g, &build(&small), &CheckOptions::default()).map_err(|e| e.to_string())?;
        let b = check(&g, &build(&large), &CheckOptions::default()).map_err(|e| e.to_string())?;
        if g.states().any(|s| a.holds_at(s) && !b.holds_at(s)) {
            return Err(format!("game {games}: adding an agent lost a state"));
        }
        let report = check(&g, &f, &CheckOptions::default()).map_err(|e| e.to_string())?;
        for sub in &report.subformulas {
            let alone = check(&g, &parse_formula(&sub.formula).unwrap(), &CheckOptions::default()).map_err(|e| e.to_string())?;
            if alone.root_holds() != sub.holds.as_slice() {
                return Err(format!("game {games}: `{}` changes when checked alone", sub.formula));
            }
            let Some(sr) = &sub.strategic else { continue };
            let threshold: Rational = sr.threshold.parse().map_err(|e| format!("{e}"))?;
            for w in &sr.witnesses {
                let s = g.state_id(&w.state).map_err(|e| e.to_string())?;
                let values = replay_assignment(&g, &report, sub.id, &w.assignment).ok_or("replay failed")?;
                if !sr.comparison.holds(&values[s.0], &threshold) {
                    return Err(format!("game {games}: witness at {} does not meet the threshold", w.state));
                }
                witnesses += 1;
            }
        }
        games += 1;
    }
    Ok(format!(
        "{mdps} MDPs (order, 0/1 regions, policy replay, complementation); {games} games (coalition monotonicity, memoization); {witnesses} witnesses replayed"
    ))
}

fn row(entries: &[(usize, i64, i64)]) -> Distribution<StateId> {
    Distribution::new(entries.iter().map(|&(s, n, d)| (StateId(s), Rational::new(n, d)))).unwrap()
}

fn monte_carlo_calibration() -> Outcome {
    let started = Instant::now();
    // Start state 0, target state 1, everything else safe.
    let chains = [
        ("one-third loop", MarkovChain::new(vec![row(&[(0, 1, 3), (1, 1, 3), (2, 1, 3)]), row(&[(1, 1, 1)]), row(&[(2, 1, 1)])])),
        (
            "two-step detour",
            MarkovChain::new(vec![
                row(&[(0, 1, 4), (1, 1, 4), (2, 1, 2)]),
                row(&[(1, 1, 1)]),
                row(&[(0, 1, 3), (3, 2, 3)]),
                row(&[(3, 1, 1)]),
            ]),
        ),
        (
            "biased ladder",
            MarkovChain::new(vec![
                row(&[(2, 3, 4), (3, 1, 4)]),
                row(&[(1, 1, 1)]),
                row(&[(1, 2, 3), (0, 1, 3)]),
                row(&[(3, 1, 1)]),
            ]),
        ),
    ];
    let mut lines = Vec::new();
    for (name, mc) in &chains {
        let n = mc.len();
        let safe = vec![true; n];
        let target: Vec<bool> = (0..n).map(|s| s == 1).collect();
        let exact = chain_until_probability(mc, &safe, &target)[0].clone();
        if exact.is_zero() || exact.is_one() {
            return Err(format!("{name}: reference value {exact} is not interior"));
        }
        let goal = PathGoal::Until(safe, target);
        let mut hits = 0;
        for seed in 0..100 {
            let opts = SampleOptions {
                samples: 4000,
                seed,
                max_steps: 10_000,
            };
            if sample_chain(mc, StateId(0), &goal, &opts).contains(exact.to_f64()) {
                hits += 1;
            }
        }
        if hits < 97 {
            return Err(format!("{name}: exact {exact} inside the interval in only {hits}/100 trials"));
        }
        lines.push(format!("{name} {exact}: {hits}/100"));
    }
    within(started, Duration::from_secs(60), lines.join(", "))
}

fn run_patl(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_patl")).args(args).output().map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let model = dir.path().join("election.json");
    let model = model.to_str().unwrap();
    let hidden = dir.path().join("hidden.json");
    let hidden = hidden.to_str().unwrap();
    let commands: [&[&str]; 2] = [
        &["gen-election", "-o", model],
        &["gen-election", "--arrival", "uniform", "--likes", "10,01", "--likes", "10,10", "-o", hidden],
    ];
    for args in commands {
        let gen = run_patl(args)?;
        if !gen.status.success() {
            return Err(String::from_utf8_lossy(&gen.stderr).into_owned());
        }
    }
    let maze = models().join("maze.json");
    let cases = [
        (model.to_string(), "<<v1>>{>=1/2} F selected_2 | <<v1,v2>>{>1/3} X <<v2>>{<1} F rejected_1".to_string()),
        (hidden.to_string(), "<<v1>>{>=1/2} F selected_2 | <<>>{>1/3} X <<v1>>{<1} F rejected_1".to_string()),
        (maze.to_str().unwrap().to_string(), "<<2>>{<=1/2} (!p U <<1>>{>=1} X p)".to_string()),
    ];
    let mut bytes = 0;
    for (path, formula) in &cases {
        let one = run_patl(&["check", path, formula, "--format", "json", "--jobs", "1"])?;
        let eight = run_patl(&["check", path, formula, "--format", "json", "--jobs", "8"])?;
        if one.status.code() == Some(2) {
            return Err(String::from_utf8_lossy(&one.stderr).into_owned());
        }
        if one.stdout != eight.stdout || one.status.code() != eight.status.code() {
            return Err(format!("`{formula}`: reports differ between 1 and 8 jobs"));
        }
        bytes += one.stdout.len();
    }
    Ok(format!("{} reports byte-identical across --jobs 1 and --jobs 8 ({bytes} bytes)", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("dirac-reduction soundness", dirac_reduction),
        ("oracle equivalence fuzzing", fuzz_equivalence),
        ("exact probability solves", exact_solves),
        ("election scenario", election_scenario),
        ("complementation and monotonicity invariants", invariant_suites),
        ("monte carlo calibration", monte_carlo_calibration),
        ("determinism across job counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
