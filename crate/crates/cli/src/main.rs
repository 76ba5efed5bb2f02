//! `tracelift` command-line tool.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 time limit reached,
//! 3 parameter budget exceeded.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};
use tracelift::eval::diff_domains;
use tracelift::gen::{random_walk, replay_plan};
use tracelift::gi::{parse_graph, solve_gi};
use tracelift::learn::{learn, LearnConfig, LearnError};
use tracelift::pddl::{emit_domain, parse_domain, parse_plan, parse_problem};
use tracelift::synth::SynthError;
use tracelift::trace::{emit_trace, parse_trace};

#[derive(Parser, Debug)]
#[command(
    name = "tracelift",
    version,
    about = "Learn typed STRIPS action schemas from state traces"
)]
struct Cli {
    /// key = value settings file (overridden by flags, overrides TRACELIFT_* variables)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Total time budget for synthesis, in seconds
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    /// Seed for random choices
    #[arg(long)]
    seed: Option<u64>,
    /// How many parameters beyond the observed minimum an action may get
    #[arg(long, value_name = "N")]
    param_budget_extra: Option<usize>,
    /// Worker threads for per-action synthesis
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

impl Common {
    fn overrides(&self, strict: Option<bool>) -> Overrides {
        Overrides {
            time_limit_secs: self.time_limit,
            seed: self.seed,
            param_budget_extra: self.param_budget_extra,
            workers: self.workers,
            strict_types: strict,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a domain from a header and label-only traces
    Synth {
        /// PDDL domain providing types and predicates; its actions are ignored
        #[arg(long)]
        header: PathBuf,
        /// Trace files
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Where to write the learned domain (stdout if omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Write each action's final formula as DIMACS into this directory
        #[arg(long, value_name = "DIR")]
        debug_cnf: Option<PathBuf>,
        /// Print per-action solver statistics to stderr
        #[arg(long)]
        diagnostics: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Produce a trace by replaying a plan or by a random walk
    Gen {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        /// Plan file, one `(action arg ...)` per line
        #[arg(
            long,
            conflicts_with = "random_walk",
            required_unless_present = "random_walk"
        )]
        plan: Option<PathBuf>,
        /// Number of random steps
        #[arg(long, value_name = "N")]
        random_walk: Option<usize>,
        /// Where to write the trace (stdout if omitted)
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare a learned domain with a reference domain
    Eval {
        #[arg(long)]
        learned: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Write the JSON report here
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
        /// Report fidelity with type-exact effect counts
        #[arg(long)]
        strict: bool,
    },
    /// Decide graph isomorphism through action synthesis
    Gi {
        g1: PathBuf,
        g2: PathBuf,
        #[arg(long)]
        directed: bool,
    },
}

/// Error carrying the exit code it should produce.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: 1,
            error: e.into(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve(cli_config: Option<&Path>, flags: Overrides) -> Result<RunConfig> {
    RunConfig::resolve(&flags, cli_config, std::env::vars())
}

fn synth_exit_code(e: &LearnError) -> u8 {
    match e {
        LearnError::Synth(SynthError::TimeLimit { .. }) => 2,
        LearnError::Synth(SynthError::ParamBudgetExceeded { .. }) => 3,
        _ => 1,
    }
}

fn cmd_synth(
    header: &Path,
    traces: &[PathBuf],
    out: Option<&Path>,
    debug_cnf: Option<&Path>,
    diagnostics: bool,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let header_text = read(header)?;
    let domain = parse_domain(&header_text).with_context(|| header.display().to_string())?;
    let header_domain = domain.header();
    let mut parsed = Vec::with_capacity(traces.len());
    for p in traces {
        let t = parse_trace(&read(p)?, &header_domain).with_context(|| p.display().to_string())?;
        parsed.push(t);
    }
    let lc = LearnConfig {
        time_limit: Some(Duration::from_secs_f64(cfg.time_limit_secs)),
        param_budget_extra: cfg.param_budget_extra,
        workers: cfg.workers,
        record_cnf: debug_cnf.is_some(),
        keep_encodings: debug_cnf.is_some(),
    };
    let learned = learn(&header_domain, &parsed, &lc).map_err(|e| Failure {
        code: synth_exit_code(&e),
        error: anyhow!(e),
    })?;
    if let Some(dir) = debug_cnf {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for a in &learned.actions {
            if let Some(cnf) = a.encoding.as_ref().and_then(|e| e.to_dimacs()) {
                let p = dir.join(format!("{}.cnf", a.schema.name));
                fs::write(&p, cnf).with_context(|| format!("cannot write {}", p.display()))?;
            }
        }
    }
    write_or_print(out, &emit_domain(&learned.domain))?;
    for a in &learned.actions {
        if out.is_some() {
            println!("{}", a.summary_line());
        } else {
            eprintln!("{}", a.summary_line());
        }
        if diagnostics {
            eprintln!("{}", a.solution.diagnostics_line());
        }
    }
    Ok(())
}

fn cmd_gen(
    domain: &Path,
    problem: &Path,
    plan: Option<&Path>,
    walk: Option<usize>,
    out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<(), Failure> {
    let d = parse_domain(&read(domain)?).with_context(|| domain.display().to_string())?;
    let p = parse_problem(&read(problem)?, &d).with_context(|| problem.display().to_string())?;
    let trace = match (plan, walk) {
        (Some(plan), _) => {
            let steps = parse_plan(&read(plan)?).with_context(|| plan.display().to_string())?;
            replay_plan(&d, &p, &steps).with_context(|| plan.display().to_string())?
        }
        (None, Some(n)) => random_walk(&d, &p, n, cfg.seed),
        (None, None) => return Err(anyhow!("either --plan or --random-walk is required").into()),
    };
    write_or_print(out, &emit_trace(&trace))?;
    Ok(())
}

fn cmd_eval(
    learned: &Path,
    reference: &Path,
    json: Option<&Path>,
    strict: bool,
) -> Result<(), Failure> {
    let l = parse_domain(&read(learned)?).with_context(|| learned.display().to_string())?;
    let r = parse_domain(&read(reference)?).with_context(|| reference.display().to_string())?;
    let report = diff_domains(&l, &r);
    if let Some(p) = json {
        fs::write(p, report.to_json() + "\n")
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    print!("{}", report.table());
    if strict {
        println!("strict fid. {:.3}", report.fidelity_strict);
    }
    Ok(())
}

fn cmd_gi(g1: &Path, g2: &Path, directed: bool) -> Result<(), Failure> {
    let a = parse_graph(&read(g1)?, directed).with_context(|| g1.display().to_string())?;
    let b = parse_graph(&read(g2)?, directed).with_context(|| g2.display().to_string())?;
    println!("{}", solve_gi(&a, &b)?);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Synth {
            header,
            traces,
            out,
            debug_cnf,
            diagnostics,
            common,
        } => {
            let cfg = resolve(file, common.overrides(None))?;
            cmd_synth(
                &header,
                &traces,
                out.as_deref(),
                debug_cnf.as_deref(),
                diagnostics,
                &cfg,
            )
        }
        Command::Gen {
            domain,
            problem,
            plan,
            random_walk,
            out,
            common,
        } => {
            let cfg = resolve(file, common.overrides(None))?;
            cmd_gen(
                &domain,
                &problem,
                plan.as_deref(),
                random_walk,
                out.as_deref(),
                &cfg,
            )
        }
        Command::Eval {
            learned,
            reference,
            json,
            strict,
        } => {
            let cfg = resolve(
                file,
                Overrides {
                    strict_types: strict.then_some(true),
                    ..Overrides::default()
                },
            )?;
            cmd_eval(&learned, &reference, json.as_deref(), cfg.strict_types)
        }
        Command::Gi { g1, g2, directed } => cmd_gi(&g1, &g2, directed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
