use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{ScenarioConfig, SignatureName};
use crate::error::RunError;
use crate::run;
use crate::scenarios::Scenario;

#[derive(Debug, Parser)]
#[command(
    name = "csoc",
    version,
    about = "Verification scenarios for complex stochastic optimal control"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its report, tables and a run manifest.
    Run(RunArgs),
    /// Print the default configuration as TOML.
    Config,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SignatureArg {
    /// diag(-1, 1, 1, 1)
    TimeNegative,
    /// diag(1, -1, -1, -1)
    TimePositive,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario to run.
    #[arg(value_enum)]
    pub scenario: Scenario,
    /// TOML configuration file; flags below override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Base seed for every random stream [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo sample or path count [default: 100000].
    #[arg(long)]
    pub n_paths: Option<usize>,
    /// Euler-Maruyama steps per path [default: 100].
    #[arg(long)]
    pub n_steps: Option<usize>,
    /// Proper-time step [default: 0.01].
    #[arg(long)]
    pub d_tau: Option<f64>,
    /// Probe points per residual scan [default: 64].
    #[arg(long)]
    pub probes: Option<usize>,
    /// Worker threads for probes and paths; results do not depend on it [default: 1].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory [default: csoc-out].
    #[arg(long, env = "CSOC_OUT_DIR", value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Reduced Planck constant [default: 1].
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Particle mass [default: 1].
    #[arg(long)]
    pub mass: Option<f64>,
    /// Speed of light [default: 1].
    #[arg(long)]
    pub c: Option<f64>,
    /// Particle charge [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub charge: Option<f64>,
    /// Metric signature [default: time-negative].
    #[arg(long, value_enum)]
    pub signature: Option<SignatureArg>,
    /// Correlation sign between real and imaginary increments, 1 or -1 [default: 1].
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<i64>,
}

impl RunArgs {
    /// File values (or defaults) with the flags applied on top.
    pub fn resolve(&self) -> Result<(ScenarioConfig, PathBuf), RunError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        let r = &mut cfg.run;
        r.scenario = self.scenario.name().to_string();
        set(&mut r.seed, self.seed);
        set(&mut r.n_paths, self.n_paths);
        set(&mut r.n_steps, self.n_steps);
        set(&mut r.d_tau, self.d_tau);
        set(&mut r.probes, self.probes);
        set(&mut r.jobs, self.jobs);
        if let Some(out) = &self.out {
            r.out_dir = Some(out.display().to_string());
        }
        let p = &mut cfg.physics;
        set(&mut p.hbar, self.hbar);
        set(&mut p.mass, self.mass);
        set(&mut p.c, self.c);
        set(&mut p.charge, self.charge);
        if let Some(s) = self.signature {
            cfg.metric.signature = match s {
                SignatureArg::TimeNegative => SignatureName::TimeNegative,
                SignatureArg::TimePositive => SignatureName::TimePositive,
            };
        }
        set(&mut cfg.metric.epsilon, self.epsilon);
        cfg.validate()?;
        let out = PathBuf::from(cfg.run.out_dir.clone().unwrap_or_else(|| "csoc-out".into()));
        Ok((cfg, out))
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Parses the command line, runs it and returns the process exit code:
/// 0 when every check passes, 1 on a failed check, 2 on a configuration
/// error and 3 on a domain error.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Config => match ScenarioConfig::default().to_toml() {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
        },
        Command::Run(args) => run_command(&args),
    }
}

fn run_command(args: &RunArgs) -> i32 {
    let (cfg, out) = match args.resolve() {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    let summary = run::execute(args.scenario, cfg, &out, |o| {
        println!(
            "{:<18} {}",
            o.scenario,
            if o.passed() { "ok" } else { "FAILED" }
        );
    });
    match summary {
        Ok(s) if s.passed() => {
            println!("results in {}", out.display());
            0
        }
        Ok(s) => {
            for f in s.failures() {
                eprintln!(
                    "check failed: {}: {}",
                    f.scenario.name(),
                    f.failed_checks.join("; ")
                );
            }
            1
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
