use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use med_bandit::config::{load_config, ExperimentConfig};
use med_bandit::dist::FiniteDistribution;
use med_bandit::dmin::{dmin, SolverParams, EXACT_BUDGET};
use med_bandit::experiment::{emit_csv, run_experiment, RunOptions};
use med_bandit::presets;

#[derive(Parser)]
#[command(
    name = "med",
    version,
    about = "MED bandit solver and regret experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML config (a path, or `preset:NAME`).
    Run {
        config: String,
        /// CSV destination; defaults to the config's `output`, then `results.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of runs per policy.
        #[arg(long)]
        runs: Option<u64>,
        /// Worker threads; results are identical for every value.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Compare cached MED divergences with exact solves every round.
        #[arg(long)]
        shadow_check: bool,
    },
    /// Solve D_min for a distribution on [-1, 0] and print the value and nu*.
    Dmin {
        /// Comma-separated support points, e.g. `-1,0`.
        #[arg(allow_hyphen_values = true)]
        points: String,
        /// Comma-separated probabilities, e.g. `0.55,0.45`.
        probs: String,
        #[arg(allow_hyphen_values = true)]
        mu: f64,
        #[arg(long, default_value_t = EXACT_BUDGET)]
        r: u32,
        #[arg(long, default_value_t = 0.0)]
        nu0: f64,
    },
    /// Bundled reference configs.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    /// Print a preset's TOML.
    Show {
        name: String,
    },
}

fn parse_list(s: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid {what} entry `{t}`"))
        })
        .collect()
}

fn resolve_config(spec: &str) -> anyhow::Result<ExperimentConfig> {
    if let Some(name) = spec.strip_prefix("preset:") {
        return Ok(presets::config(name)?);
    }
    load_config(&PathBuf::from(spec))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run {
            config,
            output,
            seed,
            runs,
            workers,
            shadow_check,
        } => {
            let mut cfg = resolve_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(runs) = runs {
                if runs == 0 {
                    bail!("--runs must be at least 1");
                }
                cfg.runs = runs;
            }
            if workers == 0 {
                bail!("--workers must be at least 1");
            }
            let path = output
                .or_else(|| cfg.output.clone())
                .unwrap_or_else(|| PathBuf::from("results.csv"));
            let result = run_experiment(
                &cfg,
                RunOptions {
                    workers,
                    shadow_check,
                },
            )?;
            emit_csv(&result.rows, &path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            print!("{}", result.summary());
            println!("wrote {} rows to {}", result.rows.len(), path.display());
        }
        Command::Dmin {
            points,
            probs,
            mu,
            r,
            nu0,
        } => {
            let f = FiniteDistribution::new(
                parse_list(&points, "points")?,
                parse_list(&probs, "probs")?,
            )?;
            let res = dmin(&f, mu, SolverParams::new(r, nu0)?)?;
            println!("value = {}", res.value);
            println!("nu_star = {}", res.nu_star);
        }
        Command::Presets { action } => match action {
            PresetAction::List => {
                for p in presets::PRESETS {
                    println!("{:<8} {}", p.name, p.summary);
                }
            }
            PresetAction::Show { name } => {
                let p =
                    presets::find(&name).with_context(|| format!("no preset named `{name}`"))?;
                print!("{}", p.text);
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
