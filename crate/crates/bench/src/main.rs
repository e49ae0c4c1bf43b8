//! `mp-bench`: volume queries, single planner runs, experiment sweeps and
//! preset configuration files.

use std::io::Write;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use mp_bench::config::{ExperimentConfig, NnKind, PlannerId, ScenarioConfig, StrategyConfig};
use mp_bench::preset::preset;
use mp_bench::row::{CSV_HEADER, FORMAT_VERSION};
use mp_bench::sweep::{run_sweep, run_trial, TrialSpec};
use mp_core::space::StateSpace;
use mp_core::volume::{
    ball_volume, ball_volume_monte_carlo, compound_ball_volume_numeric, is_well_behaved,
};

#[derive(Parser)]
#[command(name = "mp-bench", about = "Motion-planning primitives benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ball volume of a space at a radius: closed form, numeric integral and
    /// optional Monte-Carlo estimate as CSV.
    Volume {
        /// Space description: inline JSON or a path to a JSON file.
        #[arg(long)]
        space: String,
        #[arg(long)]
        radius: f64,
        /// Rejection-sampling trials; omit to skip the estimate.
        #[arg(long)]
        mc_trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One planner run on a scenario, written as a single result row.
    Plan {
        #[arg(long)]
        planner: String,
        /// Scenario description: inline JSON or a path to a JSON file.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value = "radial")]
        strategy: String,
        /// Use the thin-factor projection heuristic (radial only).
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 1.0)]
        multiplier: f64,
        #[arg(long, default_value = "tree")]
        nn: String,
        /// Roadmap size target (batch planners).
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Iteration budget (rrt-star).
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long)]
        res_fraction: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Run every trial of an experiment config.
    Sweep {
        #[arg(long)]
        config: String,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Write a named preset configuration.
    Preset {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: String,
    },
}

fn read_inline_or_file(arg: &str) -> anyhow::Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))
    }
}

fn cmd_volume(space: &str, radius: f64, mc_trials: Option<usize>, seed: u64) -> anyhow::Result<()> {
    let text = read_inline_or_file(space)?;
    let space: StateSpace = serde_json::from_str(&text).context("parsing space JSON")?;
    space.validate().map_err(|e| anyhow::anyhow!("{e}"))?;

    let canonical = serde_json::to_string(&space)?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    let hash = hasher.finalize();
    let short: String = hash[..6].iter().map(|b| format!("{b:02x}")).collect();

    let closed = ball_volume(&space, radius);
    // the numeric integral applies to compounds led by a well-behaved factor
    let numeric = match &space {
        StateSpace::Compound {
            p,
            children,
            weights,
        } if children.len() >= 2 && is_well_behaved(&children[0]) => {
            let (rest, w2) = if children.len() == 2 {
                (children[1].clone(), weights[1])
            } else {
                (
                    StateSpace::Compound {
                        p: *p,
                        children: children[1..].to_vec(),
                        weights: weights[1..].to_vec(),
                    },
                    1.0,
                )
            };
            compound_ball_volume_numeric(&children[0], &rest, weights[0], w2, *p, radius)
                .map(|v| format!("{v}"))
                .unwrap_or_default()
        }
        _ => String::new(),
    };
    let (mc, mc_stderr) = match mc_trials {
        Some(trials) => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (est, se) = ball_volume_monte_carlo(&space, radius, trials, &mut rng)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            (format!("{est}"), format!("{se}"))
        }
        None => (String::new(), String::new()),
    };
    println!("space_hash,r,closed,numeric,mc,mc_stderr");
    println!("{short},{radius},{closed},{numeric},{mc},{mc_stderr}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    planner: PlannerId,
    scenario: &str,
    strategy: &str,
    heuristic: bool,
    eta: f64,
    multiplier: f64,
    nn: NnKind,
    n: usize,
    iterations: usize,
    res_fraction: Option<f64>,
    seed: u64,
    out: Option<&str>,
) -> anyhow::Result<()> {
    let text = read_inline_or_file(scenario)?;
    let scenario_cfg: ScenarioConfig =
        serde_json::from_str(&text).context("parsing scenario JSON")?;
    let strategy_cfg = match strategy {
        "radial" => StrategyConfig::Radial { eta, heuristic },
        "knn" => StrategyConfig::Knn { multiplier },
        other => bail!("unknown strategy {other:?} (radial or knn)"),
    };
    let config = ExperimentConfig {
        planner,
        scenario: scenario_cfg,
        strategy: strategy_cfg,
        nn,
        n_target: n,
        iterations,
        res_fraction,
        steer_cap: None,
        goal_bias: 0.0,
        sweep: mp_bench::config::Sweep {
            axis: mp_bench::config::SweepAxis::N,
            values: vec![n as f64],
        },
        seeds: vec![seed],
        out: String::new(),
    };
    let row = run_trial(&TrialSpec {
        config,
        axis_value: n as f64,
        seed,
    });
    println!("{CSV_HEADER}");
    println!("{}", row.to_csv());
    if let Some(path) = out {
        let mut file = std::fs::File::create(path).with_context(|| format!("creating {path}"))?;
        writeln!(file, "{FORMAT_VERSION}")?;
        writeln!(file, "{CSV_HEADER}")?;
        writeln!(file, "{}", row.to_csv())?;
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Volume {
            space,
            radius,
            mc_trials,
            seed,
        } => cmd_volume(&space, radius, mc_trials, seed)?,
        Command::Plan {
            planner,
            scenario,
            strategy,
            heuristic,
            eta,
            multiplier,
            nn,
            n,
            iterations,
            res_fraction,
            seed,
            out,
        } => cmd_plan(
            planner.parse()?,
            &scenario,
            &strategy,
            heuristic,
            eta,
            multiplier,
            nn.parse()?,
            n,
            iterations,
            res_fraction,
            seed,
            out.as_deref(),
        )?,
        Command::Sweep { config, workers } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {config}"))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let rows = run_sweep(&cfg, workers)?;
            let failed = rows.iter().filter(|r| !r.success).count();
            eprintln!(
                "sweep complete: {} rows ({failed} unsuccessful) -> {}",
                rows.len(),
                cfg.out
            );
        }
        Command::Preset { name, out } => {
            let cfg = preset(&name)?;
            std::fs::write(&out, cfg.to_json()).with_context(|| format!("writing {out}"))?;
            eprintln!("wrote preset {name} -> {out}");
        }
    }
    Ok(())
}
