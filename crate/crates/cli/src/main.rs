use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use softclip_cli::config::Config;
use softclip_cli::{catalogue_text, cmd_run, cmd_sweep, cmd_verify, out_dir};

#[derive(Parser)]
#[command(
    name = "softclip",
    about = "Soft-clipped stochastic optimization: runs, step-size sweeps and bound verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated run seeds, overriding run.seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Iteration count, overriding run.iters.
    #[arg(long)]
    iters: Option<u64>,
    /// Output directory, overriding run.out.
    #[arg(long)]
    out: Option<String>,
    /// Worker count for concurrent runs, overriding run.workers.
    #[arg(long)]
    workers: Option<usize>,
    /// Dotted-path config overrides, e.g. --set problem.noise=0.5
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute all configured (method × seed) runs and write traces.
    Run(CommonArgs),
    /// Re-run every method over a grid of constant step sizes.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated step sizes, or `preset` for the built-in grid.
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Run the configured diagnostic checks; exits nonzero on a hard fail.
    Verify(CommonArgs),
    /// Print the scheme, method, problem and schedule catalogues.
    List,
}

fn load_config(common: &CommonArgs, extra: &[String]) -> Result<Config> {
    let text = std::fs::read_to_string(&common.config)
        .with_context(|| format!("cannot read config file {}", common.config.display()))?;
    let mut overrides = common.set.clone();
    overrides.extend(extra.iter().cloned());
    if let Some(seeds) = &common.seeds {
        overrides.push(format!("run.seeds=[{seeds}]"));
    }
    if let Some(iters) = common.iters {
        overrides.push(format!("run.iters={iters}"));
    }
    if let Some(out) = &common.out {
        overrides.push(format!("run.out=\"{out}\""));
    }
    if let Some(workers) = common.workers {
        overrides.push(format!("run.workers={workers}"));
    }
    Config::from_toml_str(&text, &overrides)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(common) => {
            let config = load_config(&common, &[])?;
            let summary = cmd_run(&config)?;
            let diverged = summary.runs.iter().filter(|r| r.diverged).count();
            println!(
                "ran {} runs on `{}` ({} diverged); artifacts in {}",
                summary.runs.len(),
                summary.problem,
                diverged,
                out_dir(&config).display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, alphas } => {
            let extra = match alphas.as_deref() {
                None | Some("preset") => vec![],
                Some(list) => vec![format!("sweep.alphas=[{list}]")],
            };
            let config = load_config(&common, &extra)?;
            let summary = cmd_sweep(&config)?;
            let diverged = summary.rows.iter().filter(|r| r.diverged).count();
            println!(
                "swept {} step sizes on `{}` ({} of {} runs diverged); artifacts in {}",
                summary.alphas.len(),
                summary.problem,
                diverged,
                summary.rows.len(),
                out_dir(&config).display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(common) => {
            let config = load_config(&common, &[])?;
            let report = cmd_verify(&config)?;
            for (name, result) in &report.checks {
                println!("{name}: {:?}", result.status);
            }
            if report.any_fail {
                eprintln!("verification failed; see verify.json");
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::List => {
            print!("{}", catalogue_text());
            Ok(ExitCode::SUCCESS)
        }
    }
}
