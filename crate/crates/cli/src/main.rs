use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qqlearn::env::RandomMdpLimits;
use qqlearn::Objective;
use qqlearn_cli::commands::{self, OracleArgs, SimulateArgs, SolveArgs, TrainArgs};
use qqlearn_cli::config::ExperimentConfig;
use qqlearn_cli::environment::BUILT_INS;
use qqlearn_cli::{CliError, Result, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "qqlearn",
    version,
    about = "Quantile-criterion solving and learning on episodic MDPs"
)]
struct Cli {
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model for structural errors.
    Validate {
        /// Built-in name (wwtbam, toy, example1) or model file; defaults to the config's environment.
        target: Option<String>,
    },
    /// Exact envelopes, optimal quantile and greedy policy.
    Solve {
        target: Option<String>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        objective: Option<Objective>,
    },
    /// QQ-learning from a config.
    Train {
        /// Number of concurrent runs with split seeds.
        #[arg(long)]
        runs: Option<u32>,
        /// Ten million steps.
        #[arg(long)]
        long: bool,
    },
    /// Roll out a policy and compare with its exact distribution.
    Simulate {
        target: Option<String>,
        /// Policy file; optional for models with a single policy.
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long, default_value_t = 100_000)]
        episodes: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5])]
        tau: Vec<f64>,
    },
    /// Compare solver quantiles with brute-force enumeration on random models.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        #[arg(long, default_value_t = 6)]
        max_states: usize,
        #[arg(long, default_value_t = 3)]
        max_actions: usize,
        #[arg(long, default_value_t = 3)]
        max_horizon: usize,
        #[arg(long, default_value_t = 4)]
        max_end_states: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn load_config(path: Option<&Path>) -> Result<Option<ExperimentConfig>> {
    path.map(ExperimentConfig::load).transpose()
}

/// Positional target, or the config's environment.
fn target(given: Option<String>, cfg: Option<&ExperimentConfig>) -> Result<String> {
    if let Some(t) = given {
        return Ok(t);
    }
    let cfg = cfg.ok_or_else(|| CliError::Usage("give a model or --config".into()))?;
    if BUILT_INS.contains(&cfg.environment.as_str()) {
        Ok(cfg.environment.clone())
    } else {
        Ok(cfg
            .base_dir
            .join(&cfg.environment)
            .to_string_lossy()
            .into_owned())
    }
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let config = cli.config.as_deref();
    let out_dir = cli.out.as_deref();
    match cli.command {
        Command::Validate { target: t } => {
            let cfg = load_config(config)?;
            commands::validate(&target(t, cfg.as_ref())?, out)
        }
        Command::Solve {
            target: t,
            tau,
            objective,
        } => {
            let cfg = load_config(config)?;
            let tau = tau
                .or(cfg.as_ref().map(|c| c.tau))
                .ok_or_else(|| CliError::Usage("--tau is required without --config".into()))?;
            let objective = objective
                .or(cfg.as_ref().map(|c| c.objective))
                .unwrap_or(Objective::Upper);
            let target = target(t, cfg.as_ref())?;
            commands::solve(
                &SolveArgs {
                    target: &target,
                    tau,
                    objective,
                    out_dir,
                },
                out,
            )
        }
        Command::Train { runs, long } => {
            let config = config.ok_or_else(|| CliError::Usage("train needs --config".into()))?;
            commands::train(
                &TrainArgs {
                    config,
                    seed: cli.seed,
                    out_dir,
                    runs,
                    long,
                },
                out,
            )
        }
        Command::Simulate {
            target: t,
            policy,
            episodes,
            tau,
        } => {
            let cfg = load_config(config)?;
            let target = target(t, cfg.as_ref())?;
            let seed = cli.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
            commands::simulate(
                &SimulateArgs {
                    target: &target,
                    policy: policy.as_deref(),
                    episodes,
                    seed,
                    taus: &tau,
                    out_dir,
                },
                out,
            )
        }
        Command::OracleCheck {
            seeds,
            max_states,
            max_actions,
            max_horizon,
            max_end_states,
        } => commands::oracle_check(
            &OracleArgs {
                seeds,
                seed: cli.seed.unwrap_or(0),
                limits: RandomMdpLimits {
                    max_states,
                    max_actions,
                    max_horizon,
                    max_end_states,
                },
                out_dir,
            },
            out,
        ),
    }
}
