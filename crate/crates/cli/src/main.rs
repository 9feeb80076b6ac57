use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use patl_core::checker::{check, render_table, CheckOptions, CheckReport};
use patl_core::election::{election_formulas, election_raw, formulas_file, Arrival, ElectionConfig};
use patl_core::logic::{desugar, parse_formula, parse_formula_lines, Formula};
use patl_core::mdp::{extremal_next, extremal_until, induce_mdp, Extremum};
use patl_core::model::{validate_cgs, AgentId, RawModel, StateId};
use patl_core::oracle::{brute_force_check, monte_carlo_estimate, parse_profile, PathGoal, SampleOptions, DEFAULT_LIMIT};
use patl_core::strategy::StrategySpace;
use patl_core::{Cgs, Rational};

#[derive(Parser)]
#[command(name = "patl", version, about = "Exact PATL model checking for stochastic game structures with imperfect information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file for structural problems.
    Validate {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Decide formulas at every state.
    Check(CheckArgs),
    /// Estimate a path probability under a memoryless profile by sampling.
    Simulate(SimulateArgs),
    /// Generate the committee election model and its formula file.
    GenElection(ElectionArgs),
    /// Count or list a coalition's uniform memoryless strategies.
    Strategies(StrategiesArgs),
    /// Print the MDP induced by one coalition assignment.
    DumpMdp(DumpArgs),
}

#[derive(Args)]
struct CheckArgs {
    model: PathBuf,
    /// Formula text; use --formula-file for a file with one formula per line.
    #[arg(required_unless_present = "formula_file", conflicts_with = "formula_file")]
    formula: Option<String>,
    #[arg(long)]
    formula_file: Option<PathBuf>,
    /// Report only this state and decide the exit status by it.
    #[arg(long)]
    initial: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
    /// Cross-check verdicts by exhaustive enumeration; fails on mismatch.
    #[arg(long)]
    oracle: bool,
    /// Combination limit for --oracle.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    oracle_limit: u64,
    /// Refuse strategic subformulas with more coalition assignments than this.
    #[arg(long, default_value_t = 1_000_000)]
    max_strategies: u64,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SimulateArgs {
    model: PathBuf,
    /// JSON strategy profile covering every agent.
    profile: PathBuf,
    /// Path formula: `X f`, `f U g` or `F f`.
    #[arg(long = "path")]
    path: String,
    #[arg(long)]
    start: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArrivalArg {
    Fixed,
    Uniform,
}

#[derive(Args)]
struct ElectionArgs {
    #[arg(long, short = 'm', default_value_t = 2)]
    candidates: usize,
    #[arg(long, short = 'k', default_value_t = 1)]
    committee: usize,
    #[arg(long, short = 'n', default_value_t = 2)]
    voters: usize,
    /// Selection probability after a split vote, as a fraction.
    #[arg(long, short = 'p', default_value = "1/2")]
    split: String,
    /// Per-vote override `CANDIDATE:VOTES=P`, e.g. `1:yn=3/4`.
    #[arg(long = "override")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value = "fixed")]
    arrival: ArrivalArg,
    /// Preference profile as one 0/1 row per voter, comma separated, e.g.
    /// `10,01`. Repeat for a profile drawn uniformly at the start.
    #[arg(long)]
    likes: Vec<String>,
    /// Model output path.
    #[arg(long, short = 'o', default_value = "election.json")]
    out: PathBuf,
    /// Formula file path; defaults to the model path with `.formulas.txt`.
    #[arg(long)]
    formulas: Option<PathBuf>,
}

#[derive(Args)]
struct StrategiesArgs {
    model: PathBuf,
    /// Comma-separated agents, `*` for all, empty for none.
    #[arg(long, default_value = "")]
    coalition: String,
    /// Print the assignments, in enumeration order.
    #[arg(long)]
    list: bool,
    /// Maximum assignments printed by --list.
    #[arg(long, default_value_t = 1000)]
    limit: u64,
    #[arg(long, value_enum, default_value = "human")]
    format: Format,
}

#[derive(Args)]
struct DumpArgs {
    model: PathBuf,
    #[arg(long, default_value = "")]
    coalition: String,
    /// Assignment index in enumeration order.
    #[arg(long, default_value_t = 0)]
    index: u64,
    /// Optional path formula whose extremal values are attached.
    #[arg(long = "path")]
    path: Option<String>,
    #[arg(long, value_enum, default_value = "max")]
    adversary: AdversaryArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryArg {
    Min,
    Max,
}

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        writeln!(std::io::stdout(), $($t)*)?
    }};
}

macro_rules! outw {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        write!(std::io::stdout(), $($t)*)?
    }};
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Validate { model, format } => cmd_validate(&model, format),
        Command::Check(a) => cmd_check(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::GenElection(a) => cmd_gen_election(a),
        Command::Strategies(a) => cmd_strategies(a),
        Command::DumpMdp(a) => cmd_dump_mdp(a),
    }
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    out!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load_model(path: &Path) -> Result<Cgs> {
    Ok(Cgs::load(path)?)
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_validate(path: &Path, format: Format) -> Result<u8> {
    let raw = RawModel::load(path)?;
    let violations = validate_cgs(&raw);
    match format {
        Format::Json => print_json(&serde_json::json!({
            "valid": violations.is_empty(),
            "violations": violations,
            "messages": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        }))?,
        Format::Human => {
            for v in &violations {
                out!("{v}");
            }
            if violations.is_empty() {
                out!(
                    "ok: {} states, {} agents, {} actions",
                    raw.states.len(),
                    raw.agents.len(),
                    raw.actions.len()
                );
            }
        }
    }
    Ok(if violations.is_empty() { 0 } else { 1 })
}

fn cmd_check(a: CheckArgs) -> Result<u8> {
    let cgs = load_model(&a.model)?;
    let formulas: Vec<Formula> = match (&a.formula, &a.formula_file) {
        (Some(text), _) => vec![parse_formula(text).with_context(|| format!("parsing `{text}`"))?],
        (None, Some(file)) => {
            let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let lines = parse_formula_lines(&text)
                .map_err(|(line, e)| anyhow!("{}:{line}: {e}", file.display()))?;
            if lines.is_empty() {
                bail!("{} contains no formulas", file.display());
            }
            lines.into_iter().map(|(_, f)| f).collect()
        }
        (None, None) => bail!("no formula given"),
    };
    let initial = a.initial.as_deref().map(|s| cgs.state_id(s)).transpose()?;
    let opts = CheckOptions {
        jobs: a.jobs.unwrap_or_else(default_jobs).max(1),
        max_strategies: a.max_strategies,
        timing: a.timing,
    };

    let mut reports: Vec<CheckReport> = Vec::new();
    for f in &formulas {
        let report = check(&cgs, f, &opts)?;
        if a.oracle {
            let truth = brute_force_check(&cgs, f, a.oracle_limit).with_context(|| format!("oracle on `{f}`"))?;
            let diff: Vec<&str> = cgs
                .states()
                .filter(|s| truth[s.0] != report.holds_at(*s))
                .map(|s| cgs.state_name(s))
                .collect();
            if !diff.is_empty() {
                bail!("oracle disagrees on `{f}` at state(s) {}", diff.join(", "));
            }
            if a.format == Format::Human {
                eprintln!("oracle agrees on `{f}`");
            }
        }
        reports.push(report);
    }

    let satisfied = reports.iter().all(|r| match initial {
        Some(s) => r.holds_at(s),
        None => r.holds_everywhere(),
    });
    match a.format {
        Format::Json if reports.len() == 1 => print_json(&reports[0])?,
        Format::Json => print_json(&reports)?,
        Format::Human => {
            for (i, r) in reports.iter().enumerate() {
                if i > 0 {
                    out!("\n---\n");
                }
                outw!("{}", render_table(r, initial));
                let verdict = match initial {
                    Some(s) => format!("{} at {}", if r.holds_at(s) { "holds" } else { "fails" }, cgs.state_name(s)),
                    None => {
                        let n = r.root_holds().iter().filter(|h| **h).count();
                        format!("holds at {n} of {} states", r.states.len())
                    }
                };
                out!("verdict: {verdict}");
            }
        }
    }
    Ok(if satisfied { 0 } else { 1 })
}

/// Evaluates a state formula to its satisfaction set.
fn state_set(cgs: &Cgs, f: &Formula, opts: &CheckOptions) -> Result<Vec<bool>> {
    Ok(check(cgs, f, opts)?.root_holds().to_vec())
}

/// Resolves a path formula to a sampling goal.
fn path_goal(cgs: &Cgs, text: &str, opts: &CheckOptions) -> Result<PathGoal> {
    let f = desugar(&parse_formula(text).with_context(|| format!("parsing `{text}`"))?);
    match f {
        Formula::Next(g) => Ok(PathGoal::Next(state_set(cgs, &g, opts)?)),
        Formula::Until(a, b) => Ok(PathGoal::Until(state_set(cgs, &a, opts)?, state_set(cgs, &b, opts)?)),
        other => bail!("`{other}` is not an X, U or F path formula"),
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<u8> {
    let cgs = load_model(&a.model)?;
    let text = std::fs::read_to_string(&a.profile).with_context(|| format!("reading {}", a.profile.display()))?;
    let profile = parse_profile(&cgs, &text)?;
    let opts = CheckOptions {
        jobs: a.jobs.unwrap_or_else(default_jobs).max(1),
        ..CheckOptions::default()
    };
    let goal = path_goal(&cgs, &a.path, &opts)?;
    let start = match &a.start {
        Some(s) => cgs.state_id(s)?,
        None => StateId(0),
    };
    let sample = SampleOptions {
        samples: a.samples,
        seed: a.seed,
        max_steps: a.max_steps,
    };
    if a.samples == 0 {
        bail!("--samples must be positive");
    }
    let pool = rayon_pool(opts.jobs)?;
    let est = pool.install(|| monte_carlo_estimate(&cgs, &profile, start, &goal, &sample))?;
    match a.format {
        Format::Json => print_json(&serde_json::json!({
            "start": cgs.state_name(start),
            "path": a.path,
            "seed": a.seed,
            "estimate": est,
        }))?,
        Format::Human => {
            out!("start {}  path {}", cgs.state_name(start), a.path);
            match &est.exact {
                Some(v) => out!("exact {v} (decided by graph analysis)"),
                None => out!(
                    "estimate {:.6}  99% interval [{:.6}, {:.6}]  {}/{} successes",
                    est.estimate, est.lower, est.upper, est.successes, est.samples
                ),
            }
            if est.truncated > 0 {
                out!("warning: {} walk(s) hit the step bound and count as failures", est.truncated);
            }
        }
    }
    Ok(0)
}

fn rayon_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| anyhow!("thread pool: {e}"))
}

fn parse_override(text: &str) -> Result<((usize, String), Rational)> {
    let bad = || anyhow!("override `{text}`: expected CANDIDATE:VOTES=P, e.g. 1:yn=3/4");
    let (key, p) = text.split_once('=').ok_or_else(bad)?;
    let (j, votes) = key.split_once(':').ok_or_else(bad)?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    let p: Rational = p.trim().parse().with_context(|| format!("override `{text}`"))?;
    Ok(((j, votes.trim().to_string()), p))
}

fn parse_likes(text: &str) -> Result<Vec<Vec<bool>>> {
    text.split(',')
        .map(|row| {
            row.trim()
                .chars()
                .map(|c| match c {
                    '1' => Ok(true),
                    '0' => Ok(false),
                    _ => Err(anyhow!("preference row `{row}`: use 0 and 1")),
                })
                .collect()
        })
        .collect()
}

fn cmd_gen_election(a: ElectionArgs) -> Result<u8> {
    let mut cfg = ElectionConfig::new(a.candidates, a.committee, a.voters);
    cfg.split_default = a.split.parse().with_context(|| format!("split probability `{}`", a.split))?;
    for o in &a.overrides {
        let (key, p) = parse_override(o)?;
        cfg.split_overrides.insert(key, p);
    }
    cfg.arrival = match a.arrival {
        ArrivalArg::Fixed => Arrival::Fixed,
        ArrivalArg::Uniform => Arrival::Uniform,
    };
    if !a.likes.is_empty() {
        cfg.profiles = a.likes.iter().map(|l| parse_likes(l)).collect::<Result<_>>()?;
    }
    let raw = election_raw(&cfg)?;
    let formulas = election_formulas(&cfg);
    let formula_path = a.formulas.clone().unwrap_or_else(|| a.out.with_extension("formulas.txt"));
    std::fs::write(&a.out, raw.to_json_pretty() + "\n").with_context(|| format!("writing {}", a.out.display()))?;
    std::fs::write(&formula_path, formulas_file(&formulas)).with_context(|| format!("writing {}", formula_path.display()))?;
    out!(
        "wrote {} ({} states) and {} ({} formulas, {} checkable)",
        a.out.display(),
        raw.states.len(),
        formula_path.display(),
        formulas.len(),
        formulas.iter().filter(|f| f.patl).count()
    );
    Ok(0)
}

fn coalition_ids(cgs: &Cgs, text: &str) -> Result<Vec<AgentId>> {
    let text = text.trim();
    if text == "*" {
        return Ok(cgs.agents().collect());
    }
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Ok(cgs.agent_id(s)?))
        .collect()
}

fn cmd_strategies(a: StrategiesArgs) -> Result<u8> {
    let cgs = load_model(&a.model)?;
    let space = StrategySpace::new(&cgs, &coalition_ids(&cgs, &a.coalition)?);
    let summary = space.summary(&cgs);
    let listed: Vec<_> = if a.list {
        space.iter().take(a.limit as usize).map(|c| c.to_witness(&cgs)).collect()
    } else {
        Vec::new()
    };
    match a.format {
        Format::Json => {
            let mut out = serde_json::to_value(&summary)?;
            if a.list {
                out["strategies"] = serde_json::to_value(&listed)?;
            }
            print_json(&out)?
        }
        Format::Human => {
            out!("coalition [{}]: {} assignment(s)", summary.agents.join(","), summary.count);
            for (i, w) in listed.iter().enumerate() {
                let parts: Vec<String> = w
                    .iter()
                    .map(|(agent, m)| {
                        let picks: Vec<String> = m.iter().map(|(s, c)| format!("{s}:{c}")).collect();
                        format!("{agent}{{{}}}", picks.join(" "))
                    })
                    .collect();
                out!("{i:>6}  {}", parts.join(" "));
            }
            if a.list && space.count() > (a.limit as usize).into() {
                out!("... truncated at {}", a.limit);
            }
        }
    }
    Ok(0)
}

fn cmd_dump_mdp(a: DumpArgs) -> Result<u8> {
    let cgs = load_model(&a.model)?;
    let space = StrategySpace::new(&cgs, &coalition_ids(&cgs, &a.coalition)?);
    let assignment = space
        .at(a.index)
        .ok_or_else(|| anyhow!("assignment index {} is out of range ({} assignments)", a.index, space.count()))?;
    let mdp = induce_mdp(&cgs, &assignment);
    let mode = match a.adversary {
        AdversaryArg::Min => Extremum::Min,
        AdversaryArg::Max => Extremum::Max,
    };
    let values = match &a.path {
        None => None,
        Some(text) => Some(match path_goal(&cgs, text, &CheckOptions::default())? {
            PathGoal::Next(t) => extremal_next(&mdp, &t, mode).values,
            PathGoal::Until(s, t) => extremal_until(&mdp, &s, &t, mode).values,
        }),
    };
    let mut out = BTreeMap::new();
    out.insert("assignment", serde_json::to_value(assignment.to_witness(&cgs))?);
    out.insert("mdp", serde_json::to_value(mdp.dump(&cgs, values.as_deref()))?);
    print_json(&out)?;
    Ok(0)
}
