//! `ncsc` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ncsc_core::instances::{HardInstanceSpec, InstanceMode};
use ncsc_core::metrics::Algorithm;

use crate::error::{HarnessError, HarnessResult};
use crate::spec_file::{render_spec, write_spec};
use crate::suites::{run_suite, ExperimentConfig, Suite};
use crate::verify::run_all;

pub const OUT_DIR_ENV: &str = "NCSC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "ncsc", version, about = "Hard instances, solvers and oracle-complexity experiments for nonconvex-strongly-concave minimax problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a hard-instance spec file.
    Gen(GenArgs),
    /// Run one solver on an instance file and write its trace CSV.
    Run(RunArgs),
    /// Run an experiment suite and write aggregate CSV (and SVG for sweeps).
    Bench(BenchArgs),
    /// Run the property suite; exits 1 if any property fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "ncsc-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// deterministic, finite_sum or case1
    #[arg(long, default_value = "deterministic")]
    pub mode: String,
    #[arg(long = "L")]
    pub l: f64,
    #[arg(long)]
    pub mu: f64,
    #[arg(long = "Delta", default_value_t = 1.0)]
    pub delta: f64,
    /// Target accuracy (ignored for case1, whose accuracy follows from the other parameters).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Chain length (case1: total dimension) instead of the formula value.
    #[arg(long = "d-override")]
    pub d_override: Option<usize>,
    /// File name inside the output directory.
    #[arg(long, default_value = "instance.spec")]
    pub name: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Instance spec file written by `gen`.
    #[arg(long)]
    pub instance: PathBuf,
    /// gda, alt_gda, eg, ogda, svrg, or catalyst_<eg|ogda|svrg>
    #[arg(long, default_value = "catalyst_eg")]
    pub solver: String,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Oracle-cost cap.
    #[arg(long, default_value_t = 10_000_000)]
    pub max_calls: u64,
    /// Trace row every this many iterations (plain solvers).
    #[arg(long, default_value_t = 100)]
    pub trace_every: usize,
    /// Record wall-clock times in the CSV.
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// kappa_sweep, n_sweep, lower_bound, single_run or verify_all
    #[arg(long, default_value = "kappa_sweep")]
    pub suite: String,
    /// Comma-separated solver list.
    #[arg(long, value_delimiter = ',')]
    pub solver: Vec<String>,
    /// Comma-separated seeds.
    #[arg(long, alias = "seed", value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_delimiter = ',')]
    pub kappas: Vec<f64>,
    #[arg(long = "ns", value_delimiter = ',')]
    pub ns: Vec<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Instance file for single_run.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Oracle-cost cap per run.
    #[arg(long)]
    pub max_calls: Option<u64>,
    /// Scale of the random start relative to the instance scale.
    #[arg(long)]
    pub start_noise: Option<f64>,
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub out: OutArgs,
}

fn parse_algorithms(names: &[String]) -> HarnessResult<Vec<Algorithm>> {
    names
        .iter()
        .map(|s| {
            s.parse::<Algorithm>()
                .map_err(|_| HarnessError::Config(format!("unknown solver `{s}`")))
        })
        .collect()
}

pub fn gen(args: &GenArgs) -> HarnessResult<PathBuf> {
    let mode: InstanceMode = args.mode.parse()?;
    let need_eps = || {
        args.epsilon
            .ok_or_else(|| HarnessError::Config(format!("--epsilon is required for mode {mode}")))
    };
    let spec = match mode {
        InstanceMode::Deterministic => {
            HardInstanceSpec::deterministic(args.l, args.mu, args.delta, need_eps()?, args.d_override)?
        }
        InstanceMode::FiniteSum => {
            HardInstanceSpec::finite_sum(args.n, args.l, args.mu, args.delta, need_eps()?, args.d_override)?
        }
        InstanceMode::Case1 => {
            let d = args
                .d_override
                .ok_or_else(|| HarnessError::Config("case1 needs --d-override (total dimension)".into()))?;
            HardInstanceSpec::case1(args.n, args.l, args.mu, args.delta, d)?
        }
    };
    let path = args.out.out.join(&args.name);
    write_spec(&spec, &path)?;
    print!("{}", render_spec(&spec));
    for (name, ok) in spec.epsilon_preconditions() {
        if !ok {
            eprintln!("note: accuracy precondition {name} does not hold; the call floor still applies to tail activation");
        }
    }
    Ok(path)
}

fn execute(cli: Cli) -> HarnessResult<()> {
    match cli.command {
        Command::Gen(args) => {
            let path = gen(&args)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Run(args) => {
            if !args.instance.is_file() {
                return Err(HarnessError::Config(format!(
                    "instance file {} does not exist",
                    args.instance.display()
                )));
            }
            let mut cfg = ExperimentConfig::new(Suite::SingleRun, args.out.out);
            cfg.instance = Some(args.instance);
            cfg.algorithms = parse_algorithms(std::slice::from_ref(&args.solver))?;
            cfg.tau = args.tau;
            cfg.rho = args.rho;
            cfg.seeds = vec![args.seed];
            cfg.budget = args.max_calls;
            cfg.trace_every = args.trace_every;
            cfg.timing = args.timing;
            let out = run_suite(&cfg)?;
            println!("{}", out.summary);
            for f in out.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Bench(args) => {
            let suite: Suite = args.suite.parse()?;
            let mut cfg = ExperimentConfig::new(suite, args.out.out);
            if !args.solver.is_empty() {
                cfg.algorithms = parse_algorithms(&args.solver)?;
            }
            if !args.seeds.is_empty() {
                cfg.seeds = args.seeds;
            }
            if !args.kappas.is_empty() {
                cfg.kappas = args.kappas;
            }
            if !args.ns.is_empty() {
                cfg.ns = args.ns;
            }
            if let Some(e) = args.epsilon {
                cfg.epsilon = e;
            }
            if let Some(b) = args.max_calls {
                cfg.budget = b;
            }
            if let Some(s) = args.start_noise {
                cfg.start_noise = s;
            }
            cfg.instance = args.instance;
            cfg.tau = args.tau;
            cfg.rho = args.rho;
            cfg.jobs = args.jobs;
            cfg.timing = args.timing;
            let out = run_suite(&cfg)?;
            print!("{}", out.summary);
            for f in out.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Verify(args) => {
            let report = run_all();
            print!("{report}");
            std::fs::create_dir_all(&args.out.out).map_err(|e| HarnessError::io(&args.out.out, e))?;
            let txt = args.out.out.join("verify.txt");
            std::fs::write(&txt, report.to_string()).map_err(|e| HarnessError::io(&txt, e))?;
            if report.failed() > 0 {
                return Err(HarnessError::Verification(format!(
                    "{} of {} properties failed",
                    report.failed(),
                    report.results.len()
                )));
            }
        }
    }
    Ok(())
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
