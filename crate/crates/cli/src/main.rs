//! `fsphere`: experiments for filtered approximation on the sphere.
//!
//! Exit codes: 0 success, 2 usage error, 3 certification or identity
//! failure, 4 I/O or rule-file error.

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use filtered_sphere::cubature::{CubatureRule, DEFAULT_TRIALS};
use filtered_sphere::experiments::{
    check_rule, generate_rule, gnuplot_script, run_converge, run_identities, run_norms, write_csv, ConvergeConfig,
    ExperimentRecord, IdentitiesConfig, NormsConfig, RuleSource,
};
use filtered_sphere::sobolev::{DEFAULT_EPSILON, SUP_GRID_POINTS};
use filtered_sphere::Error;

use config::{Config, Exponent, List};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 3,
            CliError::Io(_) => 4,
            CliError::Core(e) => match e {
                Error::UncertifiedRule { .. } | Error::NotZonal { .. } | Error::NonConvergence { .. } => 3,
                Error::Io { .. } | Error::RuleParse(_) => 4,
                _ => 2,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fsphere", version, about = "Filtered polynomial approximation on the sphere")]
struct Cli {
    /// key=value file with defaults for any long flag; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Operator norms ‖V_L‖ over a list of L.
    Norms(NormsArgs),
    /// Approximation errors for a Sobolev test function.
    Converge(ConvergeArgs),
    /// Generate or check cubature rules on S².
    Cubature {
        #[command(subcommand)]
        action: CubatureAction,
    },
    /// Algebraic identity checks.
    Identities(IdentitiesArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Filter name: step, vp, hermite:<r>, smooth, smooth:<end>, counterexample.
    #[arg(long)]
    filter: Option<String>,
    /// Sphere dimension.
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated scales, for example 8,16,32.
    #[arg(long = "L", value_name = "LIST")]
    scales: Option<List<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script for the CSV (needs --out).
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NormsArgs {
    #[command(flatten)]
    common: Common,
    /// Polar-angle panels for the kernel integral (default 8L).
    #[arg(long)]
    panels: Option<usize>,
    /// Adds fully discrete lower bounds with this many random probes.
    #[arg(long)]
    probes: Option<usize>,
    /// Directory of rule files t<degree>.rule; product rules otherwise.
    #[arg(long)]
    rule_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Smoothness of the test function.
    #[arg(long)]
    s: Option<f64>,
    /// Error norm exponent, a real >= 1 or `inf`.
    #[arg(long)]
    p: Option<Exponent>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Truncation degree of the test function.
    #[arg(long)]
    max_degree: Option<usize>,
    /// Grid size for sup norms.
    #[arg(long)]
    sup_points: Option<usize>,
    /// Adds fully discrete errors with Gauss-product rules.
    #[arg(long)]
    discrete: bool,
    /// Adds fully discrete errors with rules t<degree>.rule from this directory.
    #[arg(long)]
    rule_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CubatureAction {
    /// Write a certified Gauss-product rule.
    Gen {
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate a rule file at a degree.
    Check {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Args)]
struct IdentitiesArgs {
    #[arg(long)]
    filter: Option<String>,
    #[arg(long = "L", value_name = "LIST")]
    scales: Option<List<usize>>,
    /// Comma-separated Cesàro orders.
    #[arg(long, value_name = "LIST")]
    r: Option<List<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(records: &[ExperimentRecord], out: Option<&PathBuf>, plot: Option<&PathBuf>) -> Result<(), CliError> {
    let io_err = |path: &PathBuf, e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io_err(path, e))?;
            let mut w = BufWriter::new(file);
            write_csv(&mut w, records).map_err(|e| io_err(path, e))?;
            w.flush().map_err(|e| io_err(path, e))?;
        }
        None => {
            let stdout = io::stdout();
            write_csv(stdout.lock(), records).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    if let Some(script_path) = plot {
        let csv = out.ok_or_else(|| CliError::Usage("--plot needs --out".into()))?;
        std::fs::write(script_path, gnuplot_script(&csv.display().to_string(), records))
            .map_err(|e| io_err(script_path, e))?;
    }
    Ok(())
}

fn rule_source(dir: Option<PathBuf>) -> RuleSource {
    dir.map(RuleSource::Dir).unwrap_or(RuleSource::Product)
}

fn norms(args: NormsArgs, cfg: &Config) -> Result<(), CliError> {
    let c = &args.common;
    let run = NormsConfig {
        filter: cfg.pick(c.filter.clone(), "filter", "vp".to_string())?,
        d: cfg.pick(c.d, "d", 2)?,
        ls: cfg.pick(c.scales.clone(), "L", List(vec![8, 16, 32, 64, 128, 256]))?.0,
        panels: cfg.pick_opt(args.panels, "panels")?,
        discrete_probes: cfg.pick_opt(args.probes, "probes")?,
        rules: rule_source(cfg.pick_opt(args.rule_dir, "rule-dir")?),
        seed: cfg.pick(c.seed, "seed", 0)?,
    };
    let records = run_norms(&run)?;
    let out = cfg.pick_opt(c.out.clone(), "out")?;
    emit(&records, out.as_ref(), c.plot.as_ref())
}

fn converge(args: ConvergeArgs, cfg: &Config) -> Result<(), CliError> {
    let c = &args.common;
    let rule_dir = cfg.pick_opt(args.rule_dir, "rule-dir")?;
    let rules = match (rule_dir, args.discrete) {
        (Some(dir), _) => Some(RuleSource::Dir(dir)),
        (None, true) => Some(RuleSource::Product),
        (None, false) => None,
    };
    let run = ConvergeConfig {
        filter: cfg.pick(c.filter.clone(), "filter", "vp".to_string())?,
        d: cfg.pick(c.d, "d", 2)?,
        s: cfg.pick(args.s, "s", 2.0)?,
        p: cfg.pick(args.p, "p", Exponent(2.0))?.0,
        epsilon: cfg.pick(args.epsilon, "epsilon", DEFAULT_EPSILON)?,
        max_degree: cfg.pick(args.max_degree, "max-degree", 1024)?,
        ls: cfg.pick(c.scales.clone(), "L", List(vec![8, 16, 32, 64]))?.0,
        rules,
        sup_points: cfg.pick(args.sup_points, "sup-points", SUP_GRID_POINTS)?,
        seed: cfg.pick(c.seed, "seed", 0)?,
    };
    let records = run_converge(&run)?;
    let out = cfg.pick_opt(c.out.clone(), "out")?;
    emit(&records, out.as_ref(), c.plot.as_ref())
}

fn cubature(action: CubatureAction, cfg: &Config) -> Result<(), CliError> {
    match action {
        CubatureAction::Gen { degree, out, seed } => {
            let rule = generate_rule(degree, cfg.pick(seed, "seed", 0)?)?;
            rule.save(&out)?;
            println!("wrote {} nodes, degree {degree}, to {}", rule.len(), out.display());
            Ok(())
        }
        CubatureAction::Check {
            file,
            degree,
            trials,
            seed,
        } => {
            let rule = CubatureRule::load(&file)?;
            let trials = cfg.pick(trials, "trials", DEFAULT_TRIALS)?;
            let report = check_rule(&rule, degree, trials, cfg.pick(seed, "seed", 0)?);
            let verdict = if report.pass { "pass" } else { "fail" };
            println!(
                "degree={degree} nodes={} max_defect={:e} worst_degree={} {verdict}",
                rule.len(),
                report.max_defect,
                report.worst_degree
            );
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Failure(format!("rule is not exact at degree {degree}")))
            }
        }
    }
}

fn identities(args: IdentitiesArgs, cfg: &Config) -> Result<(), CliError> {
    let defaults = IdentitiesConfig::default();
    let run = IdentitiesConfig {
        filter: cfg.pick(args.filter, "filter", defaults.filter)?,
        ls: cfg.pick(args.scales, "L", List(defaults.ls))?.0,
        rs: cfg.pick(args.r, "r", List(defaults.rs))?.0,
        seed: cfg.pick(args.seed, "seed", defaults.seed)?,
    };
    let report = run_identities(&run)?;
    println!("summation_by_parts {:e}", report.summation_by_parts);
    println!("reproduction {:e}", report.reproduction);
    println!("telescoping {:e}", report.telescoping);
    if let Some(out) = cfg.pick_opt(args.out, "out")? {
        emit(&report.records, Some(&out), None)?;
    }
    if report.pass() {
        println!("pass");
        Ok(())
    } else {
        println!("fail");
        Err(CliError::Failure(format!(
            "identity deviation {:e} exceeds tolerance",
            report.max_deviation()
        )))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Norms(args) => norms(args, &cfg),
        Command::Converge(args) => converge(args, &cfg),
        Command::Cubature { action } => cubature(action, &cfg),
        Command::Identities(args) => identities(args, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fsphere: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
