use std::io;
use std::path::PathBuf;
use std::process;

use anyon_otto_cli::{
    cmd_cycle, cmd_sweep, cmd_validate, ConfigError, ExitStatus, Mode, RawConfig, RunConfig,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "anyon-otto",
    version,
    about = "Quantum Otto cycles with anyonic working media"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one cycle.
    #[command(allow_negative_numbers = true)]
    Cycle(RunArgs),
    /// Evaluate the cycle over a grid of one parameter.
    #[command(allow_negative_numbers = true)]
    Sweep(RunArgs),
    /// Check every closed form against direct summation.
    #[command(allow_negative_numbers = true)]
    Validate(RunArgs),
}

/// Every setting is also accepted as `key = value` in the config file; flags
/// win over the file.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ring, cs-volume or cs-coupling.
    #[arg(long)]
    medium: Option<String>,
    #[arg(long = "beta-h")]
    beta_h: Option<String>,
    #[arg(long = "beta-l")]
    beta_l: Option<String>,
    /// Ring level spacing (default 1).
    #[arg(long)]
    eps0: Option<String>,
    #[arg(long = "alpha-h")]
    alpha_h: Option<String>,
    #[arg(long = "alpha-l")]
    alpha_l: Option<String>,
    /// Expanded ring size of the cs-volume engine.
    #[arg(long)]
    l1: Option<String>,
    /// Compressed ring size of the cs-volume engine.
    #[arg(long)]
    l2: Option<String>,
    /// Coupling of the cs-volume engine.
    #[arg(long)]
    alpha: Option<String>,
    /// Cold coupling of the cs-coupling engine.
    #[arg(long)]
    alpha1: Option<String>,
    /// Hot coupling of the cs-coupling engine.
    #[arg(long)]
    alpha2: Option<String>,
    /// Ring size of the cs-coupling engine (default 1).
    #[arg(long)]
    length: Option<String>,
    /// Parameter to sweep.
    #[arg(long)]
    sweep: Option<String>,
    /// start:stop:steps, inclusive.
    #[arg(long)]
    grid: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated subset of csv, json, svg.
    #[arg(long)]
    format: Option<String>,
    #[arg(long = "rel-tol")]
    rel_tol: Option<String>,
    #[arg(long = "tail-tol")]
    tail_tol: Option<String>,
    /// Seed for randomised validation points.
    #[arg(long)]
    seed: Option<String>,
    /// rederived, paper-main-text or paper-appendix.
    #[arg(long)]
    variant: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Result<RawConfig, ConfigError> {
        let mut raw = RawConfig::default();
        let pairs = [
            ("medium", &self.medium),
            ("beta_h", &self.beta_h),
            ("beta_l", &self.beta_l),
            ("eps0", &self.eps0),
            ("alpha_h", &self.alpha_h),
            ("alpha_l", &self.alpha_l),
            ("l1", &self.l1),
            ("l2", &self.l2),
            ("alpha", &self.alpha),
            ("alpha1", &self.alpha1),
            ("alpha2", &self.alpha2),
            ("length", &self.length),
            ("sweep", &self.sweep),
            ("grid", &self.grid),
            ("out", &self.out),
            ("format", &self.format),
            ("rel_tol", &self.rel_tol),
            ("tail_tol", &self.tail_tol),
            ("seed", &self.seed),
            ("variant", &self.variant),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                raw.set(key, v)?;
            }
        }
        Ok(raw)
    }

    fn resolve(&self) -> Result<RawConfig, ConfigError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::default(),
        };
        raw.merge(&self.overrides()?);
        Ok(raw)
    }
}

fn run(cli: Cli) -> ExitStatus {
    let (args, mode) = match &cli.command {
        Command::Cycle(a) => (a, Mode::Cycle),
        Command::Sweep(a) => (a, Mode::Sweep),
        Command::Validate(a) => (a, Mode::Validate),
    };
    let configured = args
        .resolve()
        .and_then(|raw| RunConfig::from_raw(&raw, mode).map(|cfg| (raw, cfg)));
    let (raw, cfg) = match configured {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitStatus::Config;
        }
    };
    let mut stdout = io::stdout().lock();
    let outcome = match mode {
        Mode::Cycle => cmd_cycle(&cfg, &raw, &mut stdout),
        Mode::Sweep => cmd_sweep(&cfg, &raw, &mut stdout),
        Mode::Validate => cmd_validate(&cfg, &mut stdout),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.status()
    })
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            process::exit(0);
        }
        Err(e) => {
            let _ = e.print();
            process::exit(ExitStatus::Config.code());
        }
    };
    process::exit(run(cli).code());
}
