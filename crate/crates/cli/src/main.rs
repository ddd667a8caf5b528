//! `hsmc`: model checking of interval temporal logic formulas over finite
//! Kripke structures.
//!
//! Exit status: 0 when the property holds, 1 when it is violated, 2 on
//! usage, input or fragment errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hsmc_core::checker::{check, mod_check_with, CheckOptions};
use hsmc_core::conp::provide_counterex;
use hsmc_core::descriptor::{build_bk_descriptor, scan, DescriptorSequence};
use hsmc_core::formula::{classify, modalities, nest_b, parse, Formula, Fragment, Modality};
use hsmc_core::kripke::{Kripke, Track};
use hsmc_core::oracle::{bound_is_exact, exact_eval, exact_mod_check, oracle_eval, oracle_mod_check, OracleConfig};
use hsmc_core::reductions::{qbf_to_kripke, sat_to_kripke, Cnf, Qbf};
use hsmc_core::unravel::{unravel, Direction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "hsmc", version, about = "Interval temporal logic model checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether every initial track (or each given track) satisfies a formula.
    Check(CheckArgs),
    /// Search for an initial track violating a universal formula over A, Ai, B, E.
    Counterexample(InputArgs),
    /// Print the descriptor sequence, clusters and scan configurations of a track.
    Descriptors(DescriptorArgs),
    /// List the track representatives from or into a state.
    Unravel(UnravelArgs),
    /// Evaluate with the brute-force semantics.
    Oracle(OracleArgs),
    /// Generate a reduction instance.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args)]
struct InputArgs {
    /// Model file.
    #[arg(short, long)]
    model: PathBuf,
    /// Formula file.
    #[arg(short, long, conflicts_with = "expr", required_unless_present = "expr")]
    formula: Option<PathBuf>,
    /// Formula text.
    #[arg(short, long)]
    expr: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Auto,
    Representative,
    Conp,
    Oracle,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value = "auto")]
    engine: Engine,
    /// Check this track only (state names separated by spaces); repeatable.
    #[arg(long)]
    track: Vec<String>,
    /// Worker threads for the representative engine.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Refuse representative runs whose length bound exceeds this.
    #[arg(long, env = "HSMC_MAX_TAU", default_value_t = 1_000_000)]
    max_tau: u128,
    /// Recheck the verdict with the exact oracle.
    #[arg(long)]
    verify_with_oracle: bool,
}

#[derive(Args)]
struct DescriptorArgs {
    #[arg(short, long)]
    model: PathBuf,
    /// State names separated by spaces.
    #[arg(long)]
    track: String,
    /// Highest array index of the cluster scan; also the depth of `--tree`.
    #[arg(short, long, default_value_t = 1)]
    k: usize,
    /// Also print the B_k-descriptor tree.
    #[arg(long)]
    tree: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Forw,
    Backw,
}

#[derive(Args)]
struct UnravelArgs {
    #[arg(short, long)]
    model: PathBuf,
    /// Anchor state; defaults to the initial state.
    #[arg(long)]
    from: Option<String>,
    #[arg(short, long, default_value_t = 0)]
    k: usize,
    #[arg(long, value_enum, default_value = "forw")]
    dir: Dir,
    /// Stop after this many tracks.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Longest track explored.
    #[arg(long, default_value_t = 12, conflicts_with = "exact")]
    depth: usize,
    /// Use the automaton construction instead of a length bound.
    #[arg(long)]
    exact: bool,
    /// Evaluate on this track only; repeatable.
    #[arg(long)]
    track: Vec<String>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Quantified Boolean formula and its A/Bi encoding.
    Qbf {
        #[arg(long, default_value_t = 3)]
        vars: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest matrix, in formula nodes.
        #[arg(long, default_value_t = 8)]
        size: usize,
        /// Encode this file instead of a random formula.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Writes <out>.qbf, <out>.kripke and <out>.hs.
        #[arg(long)]
        out: PathBuf,
    },
    /// CNF formula and its propositional encoding.
    Sat {
        #[arg(long, default_value_t = 4)]
        vars: usize,
        #[arg(long, default_value_t = 8)]
        clauses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Encode this file instead of a random formula.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Writes <out>.cnf, <out>.kripke and <out>.hs.
        #[arg(long)]
        out: PathBuf,
    },
}

type Outcome = Result<(bool, String), String>;

fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_model(path: &Path) -> Result<Kripke, String> {
    Kripke::parse(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_formula(input: &InputArgs) -> Result<Formula, String> {
    let text = match (&input.formula, &input.expr) {
        (Some(path), _) => {
            let raw = read(path)?;
            raw.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n")
        }
        (None, Some(e)) => e.clone(),
        (None, None) => return Err("a formula is required".into()),
    };
    parse(&text).map_err(|e| e.to_string())
}

fn load_tracks(k: &Kripke, texts: &[String]) -> Result<Vec<Track>, String> {
    texts.iter().map(|t| k.parse_track(t).map_err(|e| format!("track `{t}`: {e}"))).collect()
}

fn ce_line(k: &Kripke, states: &[usize]) -> String {
    format!("CE: {}\n", k.format_states(states))
}

fn with_oracle(k: &Kripke, f: &Formula, holds: bool, verify: bool) -> Result<(), String> {
    if verify {
        let exact = exact_mod_check(k, f).map_err(|e| e.to_string())?;
        if exact.holds != holds {
            return Err(format!(
                "the oracle disagrees: it says the formula {}",
                if exact.holds { "holds" } else { "is violated" }
            ));
        }
    }
    Ok(())
}

fn verdict_text(holds: bool) -> &'static str {
    if holds {
        "holds\n"
    } else {
        "violated\n"
    }
}

fn run_check(args: &CheckArgs) -> Outcome {
    let k = load_model(&args.input.model)?;
    let f = load_formula(&args.input)?;
    let has_e = modalities(&f).contains(&Modality::E);
    let fragment = classify(&f);
    let engine = match args.engine {
        Engine::Auto => match fragment {
            Fragment::ForallAAbarBE if has_e => Engine::Conp,
            Fragment::OutOfScope => {
                return Err("the formula is outside the supported fragments; use --engine oracle".into())
            }
            _ if has_e => {
                return Err(
                    "<E>/[E] is only supported in universal formulas over A, Ai, B, E; use --engine oracle".into()
                )
            }
            _ => Engine::Representative,
        },
        e => e,
    };

    if !args.track.is_empty() {
        let tracks = load_tracks(&k, &args.track)?;
        let mut out = String::new();
        let mut all = true;
        for t in &tracks {
            let v = match engine {
                Engine::Representative => {
                    let budget = nest_b(&f).map_err(|e| e.to_string())?;
                    check(&k, budget, &f, t).map_err(|e| e.to_string())?
                }
                _ => exact_eval(&k, t.states(), &f).map_err(|e| e.to_string())?,
            };
            all &= v;
            let _ = writeln!(out, "{}: {}", k.format_states(t.states()), if v { "holds" } else { "violated" });
        }
        return Ok((all, out));
    }

    match engine {
        Engine::Representative => {
            let options =
                CheckOptions { jobs: args.jobs.max(1), max_tau: Some(args.max_tau), ..CheckOptions::default() };
            let v = mod_check_with(&k, &f, &options).map_err(|e| e.to_string())?;
            with_oracle(&k, &f, v.holds, args.verify_with_oracle)?;
            let mut out = verdict_text(v.holds).to_string();
            if let Some(ce) = &v.counterexample {
                out.push_str(&ce_line(&k, ce.states()));
            }
            Ok((v.holds, out))
        }
        Engine::Conp => {
            let ce = provide_counterex(&k, &f).map_err(|e| e.to_string())?;
            with_oracle(&k, &f, ce.is_none(), args.verify_with_oracle)?;
            let mut out = verdict_text(ce.is_none()).to_string();
            if let Some(ce) = &ce {
                out.push_str(&ce_line(&k, ce.track.states()));
            }
            Ok((ce.is_none(), out))
        }
        Engine::Oracle => {
            let v = exact_mod_check(&k, &f).map_err(|e| e.to_string())?;
            let mut out = verdict_text(v.holds).to_string();
            if let Some(ce) = &v.counterexample {
                out.push_str(&ce_line(&k, ce.states()));
            }
            Ok((v.holds, out))
        }
        Engine::Auto => unreachable!("resolved above"),
    }
}

fn run_counterexample(args: &InputArgs) -> Outcome {
    let k = load_model(&args.model)?;
    let f = load_formula(args)?;
    match provide_counterex(&k, &f).map_err(|e| e.to_string())? {
        None => Ok((true, "no counterexample\n".into())),
        Some(ce) => {
            let mut out = ce_line(&k, ce.track.states());
            let _ = writeln!(out, "element: {}", ce.element.display(&k));
            let _ = writeln!(out, "satisfies: {}", ce.violated);
            Ok((false, out))
        }
    }
}

fn run_descriptors(args: &DescriptorArgs) -> Outcome {
    let k = load_model(&args.model)?;
    let t = k.parse_track(&args.track).map_err(|e| e.to_string())?;
    let seq = DescriptorSequence::of_track(t.states());
    let mut out = String::from("sequence:\n");
    out.push_str(&seq.display_lines(&k));
    let clusters = seq.clusters();
    for (i, c) in clusters.iter().enumerate() {
        let members: Vec<String> = c.members.iter().map(|d| d.display(&k)).collect();
        let _ = writeln!(out, "cluster {i}: positions {}..{} members {}", c.start, c.end, members.join(" "));
        for step in scan(&seq, c, args.k) {
            let _ = writeln!(out, "{:>4} {} {}", step.position, step.element.display(&k), step.configuration);
        }
    }
    if args.tree {
        let tree = build_bk_descriptor(t.states(), args.k, 1 << 24).map_err(|e| e.to_string())?;
        let _ = writeln!(out, "B_{} descriptor:", args.k);
        out.push_str(&tree.render(&k));
    }
    Ok((true, out))
}

fn run_unravel(args: &UnravelArgs) -> Outcome {
    let k = load_model(&args.model)?;
    let v = match &args.from {
        Some(name) => k.state_id(name).ok_or_else(|| format!("unknown state `{name}`"))?,
        None => k.initial(),
    };
    let dir = match args.dir {
        Dir::Forw => Direction::Forward,
        Dir::Backw => Direction::Backward,
    };
    let mut out = String::new();
    for t in unravel(&k, v, args.k, dir).take(args.limit.unwrap_or(usize::MAX)) {
        out.push_str(&k.format_states(t.states()));
        out.push('\n');
    }
    Ok((true, out))
}

fn run_oracle(args: &OracleArgs) -> Outcome {
    let k = load_model(&args.input.model)?;
    let f = load_formula(&args.input)?;
    let cfg = OracleConfig { depth_bound: args.depth };
    let mut out = String::new();
    if !args.exact && !bound_is_exact(&k, &f, &cfg) {
        out.push_str("note: results are exact only up to the depth bound\n");
    }
    if !args.track.is_empty() {
        let mut all = true;
        for t in load_tracks(&k, &args.track)? {
            let v = if args.exact { exact_eval(&k, t.states(), &f) } else { oracle_eval(&k, t.states(), &f, &cfg) }
                .map_err(|e| e.to_string())?;
            all &= v;
            let _ = writeln!(out, "{}: {}", k.format_states(t.states()), if v { "holds" } else { "violated" });
        }
        return Ok((all, out));
    }
    let v =
        if args.exact { exact_mod_check(&k, &f) } else { oracle_mod_check(&k, &f, &cfg) }.map_err(|e| e.to_string())?;
    out.push_str(verdict_text(v.holds));
    if let Some(ce) = &v.counterexample {
        out.push_str(&ce_line(&k, ce.states()));
    }
    Ok((v.holds, out))
}

fn with_extension(out: &Path, ext: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn run_gen(cmd: &GenCommand) -> Outcome {
    match cmd {
        GenCommand::Qbf { vars, seed, size, from, out } => {
            let q = match from {
                Some(p) => Qbf::parse(&read(p)?).map_err(|e| e.to_string())?,
                None => Qbf::random(&mut ChaCha8Rng::seed_from_u64(*seed), *vars, *size),
            };
            let (k, xi) = qbf_to_kripke(&q);
            write(&with_extension(out, "qbf"), &q.to_string())?;
            write(&with_extension(out, "kripke"), &k.serialize())?;
            write(&with_extension(out, "hs"), &format!("{xi}\n"))?;
            Ok((true, format!("{} states, formula is {}\n", k.num_states(), if q.eval() { "true" } else { "false" })))
        }
        GenCommand::Sat { vars, clauses, seed, from, out } => {
            let c = match from {
                Some(p) => Cnf::parse(&read(p)?).map_err(|e| e.to_string())?,
                None => {
                    if *vars == 0 {
                        return Err("at least one variable is required".into());
                    }
                    Cnf::random(&mut ChaCha8Rng::seed_from_u64(*seed), *vars, *clauses, 3)
                }
            };
            let (k, gamma) = sat_to_kripke(&c);
            write(&with_extension(out, "cnf"), &c.to_string())?;
            write(&with_extension(out, "kripke"), &k.serialize())?;
            write(&with_extension(out, "hs"), &format!("{gamma}\n"))?;
            let sat = c.brute_force().is_some();
            Ok((
                true,
                format!(
                    "{} states, formula is {}\n",
                    k.num_states(),
                    if sat { "satisfiable" } else { "unsatisfiable" }
                ),
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check(a) => run_check(a),
        Command::Counterexample(a) => run_counterexample(a),
        Command::Descriptors(a) => run_descriptors(a),
        Command::Unravel(a) => run_unravel(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Gen(g) => run_gen(g),
    };
    match result {
        Ok((holds, out)) => {
            print!("{out}");
            ExitCode::from(if holds { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
