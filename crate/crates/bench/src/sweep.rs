//! Trial execution and sweep orchestration.
//!
//! A sweep runs every (axis value, seed) pair. Count columns are exactly
//! reproducible per trial; wall-time columns are load-sensitive, so trials
//! may run on parallel workers without affecting anything a determinism
//! check reads. Rows are written incrementally in (value, seed) order
//! through a single writer regardless of worker count.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use anyhow::Context;

use mp_core::collision::{make_scenario, Scenario};
use mp_core::planner::{lazy_sprm_star, rrt_star, sprm_star, PlanResult, RrtParams};

use crate::config::{ExperimentConfig, PlannerId, ScenarioConfig, SweepAxis};
use crate::row::{ResultRow, CSV_HEADER, FORMAT_VERSION};

/// A fully resolved single trial.
#[derive(Debug, Clone)]
pub struct TrialSpec {
    pub config: ExperimentConfig,
    pub axis_value: f64,
    pub seed: u64,
}

impl TrialSpec {
    /// Applies the sweep axis to produce the concrete scenario and planner
    /// parameters of this trial.
    fn resolved(&self) -> (ScenarioConfig, usize, usize, Option<f64>) {
        let mut scenario = self.config.scenario.clone();
        let mut n_target = self.config.n_target;
        let mut iterations = self.config.iterations;
        let mut res_fraction = self.config.res_fraction;
        let v = self.axis_value;
        match self.config.sweep.axis {
            SweepAxis::N => n_target = v as usize,
            SweepAxis::Iterations => iterations = v as usize,
            SweepAxis::D => match &mut scenario {
                ScenarioConfig::Hypercube { d, .. } | ScenarioConfig::Freespace { d } => {
                    *d = v as usize
                }
                _ => unreachable!("validated"),
            },
            SweepAxis::Mu => match &mut scenario {
                ScenarioConfig::Hypercube { mu, .. } => *mu = v,
                _ => unreachable!("validated"),
            },
            SweepAxis::M => match &mut scenario {
                ScenarioConfig::Soup { m, .. } => *m = v as usize,
                _ => unreachable!("validated"),
            },
            SweepAxis::ResFraction => res_fraction = Some(v),
        }
        (scenario, n_target, iterations, res_fraction)
    }
}

/// Runs one trial to a result row. Scenario generation failures and planner
/// failures both surface as `success = false` rows rather than errors.
pub fn run_trial(spec: &TrialSpec) -> ResultRow {
    let cfg = &spec.config;
    let (scenario_cfg, n_target, iterations, res_fraction) = spec.resolved();
    let scenario = match make_scenario(&scenario_cfg.kind(), spec.seed) {
        Ok(mut sc) => {
            if let Some(f) = res_fraction {
                sc.set_res_fraction(f);
            }
            sc
        }
        Err(_) => {
            return empty_row(spec, &scenario_cfg, f64::NAN);
        }
    };
    let strategy = cfg.strategy.to_strategy(scenario.known_mu_free());
    let nn_kind = cfg.nn.to_index_kind();

    let result = match cfg.planner {
        PlannerId::Sprm => sprm_star(&scenario, n_target, &strategy, nn_kind, spec.seed),
        PlannerId::LazySprm => lazy_sprm_star(&scenario, n_target, &strategy, nn_kind, spec.seed),
        PlannerId::RrtStar => rrt_star(
            &scenario,
            iterations,
            &strategy,
            nn_kind,
            spec.seed,
            &RrtParams {
                steer_cap: cfg.steer_cap,
                goal_bias: cfg.goal_bias,
            },
        ),
    };
    match result {
        Ok(res) => to_row(spec, &scenario_cfg, &scenario, &strategy, res),
        Err(_) => empty_row(spec, &scenario_cfg, f64::NAN),
    }
}

fn scenario_dims(cfg: &ScenarioConfig) -> (usize, f64, usize) {
    match cfg {
        ScenarioConfig::Hypercube { d, mu } => (*d, *mu, 0),
        ScenarioConfig::Soup { m, .. } => (2, 0.0, *m),
        ScenarioConfig::Strip { .. } => (3, 0.0, 0),
        ScenarioConfig::Freespace { d } => (*d, 0.0, 0),
    }
}

fn to_row(
    spec: &TrialSpec,
    scenario_cfg: &ScenarioConfig,
    scenario: &Scenario,
    strategy: &mp_core::planner::ConnectionStrategy,
    res: PlanResult,
) -> ResultRow {
    let (d, mu, m) = scenario_dims(scenario_cfg);
    let ledger = &res.ledger;
    let chi = if ledger.t_cd_ns() > 0 {
        ledger.t_nn.as_secs_f64() / ledger.t_cd.as_secs_f64()
    } else {
        0.0
    };
    ResultRow {
        planner: spec.config.planner.name().into(),
        scenario: scenario_cfg.name().into(),
        d,
        mu,
        m,
        n_free: res.stats.n_free,
        n_sampled: res.stats.n_sampled,
        seed: spec.seed,
        strategy: strategy.name().into(),
        nn_kind: spec.config.nn.to_index_kind().name().into(),
        res_fraction: scenario.res_fraction.unwrap_or(0.0),
        t_nn_ns: ledger.t_nn_ns(),
        t_cd_ns: ledger.t_cd_ns(),
        chi,
        nn: ledger.nn,
        rnn: ledger.rnn,
        knn: ledger.knn,
        ap: ledger.ap,
        cd: ledger.cd,
        lp: ledger.lp,
        lp_a: ledger.lp_a,
        lp_b: ledger.lp_b,
        cd_in_lp: ledger.cd_in_lp,
        cost: res.cost,
        success: res.success,
    }
}

fn empty_row(spec: &TrialSpec, scenario_cfg: &ScenarioConfig, cost: f64) -> ResultRow {
    let (d, mu, m) = scenario_dims(scenario_cfg);
    ResultRow {
        planner: spec.config.planner.name().into(),
        scenario: scenario_cfg.name().into(),
        d,
        mu,
        m,
        n_free: 0,
        n_sampled: 0,
        seed: spec.seed,
        strategy: spec.config.strategy.to_strategy(None).name().into(),
        nn_kind: spec.config.nn.to_index_kind().name().into(),
        res_fraction: 0.0,
        t_nn_ns: 0,
        t_cd_ns: 0,
        chi: 0.0,
        nn: 0,
        rnn: 0,
        knn: 0,
        ap: 0,
        cd: 0,
        lp: 0,
        lp_a: 0,
        lp_b: 0,
        cd_in_lp: 0,
        cost,
        success: false,
    }
}

/// Runs every (axis value, seed) trial of the config on `workers` threads,
/// writing rows incrementally in deterministic trial order, then appends a
/// percentile summary and plot-data files next to the output. Returns the
/// rows in trial order.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> anyhow::Result<Vec<ResultRow>> {
    config.validate()?;
    let specs: Vec<TrialSpec> = config
        .sweep
        .values
        .iter()
        .flat_map(|&v| {
            config.seeds.iter().map(move |&seed| TrialSpec {
                config: config.clone(),
                axis_value: v,
                seed,
            })
        })
        .collect();

    let mut file = std::fs::File::create(&config.out)
        .with_context(|| format!("creating {}", config.out))?;
    writeln!(file, "{FORMAT_VERSION}")?;
    writeln!(file, "{CSV_HEADER}")?;

    // rows stream to disk in trial order as soon as the next one in line
    // finishes, whatever order the workers produce them in
    let rows = run_all(&specs, workers.max(1), |row| {
        writeln!(file, "{}", row.to_csv())?;
        file.flush()?;
        Ok(())
    })?;

    write_summary(config, &rows)?;
    for stat in ["chi", "cost", "cd_in_lp"] {
        let path = format!("{}.{stat}.dat", config.out);
        let data = emit_plot_data(&rows, config.sweep.axis, stat)?;
        std::fs::write(&path, data).with_context(|| format!("writing {path}"))?;
    }
    Ok(rows)
}

fn run_all(
    specs: &[TrialSpec],
    workers: usize,
    mut sink: impl FnMut(&ResultRow) -> anyhow::Result<()>,
) -> anyhow::Result<Vec<ResultRow>> {
    if workers <= 1 {
        let mut rows = Vec::with_capacity(specs.len());
        for spec in specs {
            let row = run_trial(spec);
            sink(&row)?;
            rows.push(row);
        }
        return Ok(rows);
    }
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, ResultRow)>();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= specs.len() {
                    break;
                }
                let row = run_trial(&specs[i]);
                if tx.send((i, row)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut out: Vec<Option<ResultRow>> = vec![None; specs.len()];
        let mut written = 0usize;
        for (i, row) in rx {
            out[i] = Some(row);
            while written < specs.len() {
                match &out[written] {
                    Some(done) => {
                        sink(done)?;
                        written += 1;
                    }
                    None => break,
                }
            }
        }
        anyhow::ensure!(written == specs.len(), "worker pool ended early");
        Ok(out
            .into_iter()
            .map(|r| r.expect("all trials ran"))
            .collect())
    })
}

/// Nearest-rank percentile of a sorted slice: the smallest value with at
/// least `q * len` values at or below it.
pub fn percentile_nearest_rank(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn stat_value(row: &ResultRow, stat: &str) -> anyhow::Result<f64> {
    Ok(match stat {
        "chi" => row.chi,
        "cost" => row.cost,
        "t_nn_ns" => row.t_nn_ns as f64,
        "t_cd_ns" => row.t_cd_ns as f64,
        "cd_in_lp" => row.cd_in_lp as f64,
        "lp" => row.lp as f64,
        "cd" => row.cd as f64,
        "rnn" => row.rnn as f64,
        other => anyhow::bail!("unknown stat column {other:?}"),
    })
}

fn axis_value(row: &ResultRow, axis: SweepAxis) -> f64 {
    match axis {
        SweepAxis::N => row.n_free.saturating_sub(2) as f64,
        SweepAxis::Iterations => row.n_sampled as f64,
        SweepAxis::D => row.d as f64,
        SweepAxis::Mu => row.mu,
        SweepAxis::M => row.m as f64,
        SweepAxis::ResFraction => row.res_fraction,
    }
}

/// Groups rows by their swept value in first-seen order.
fn group_by_axis(rows: &[ResultRow], axis: SweepAxis) -> Vec<(f64, Vec<&ResultRow>)> {
    let mut groups: Vec<(f64, Vec<&ResultRow>)> = Vec::new();
    for row in rows {
        let v = axis_value(row, axis);
        match groups.iter_mut().find(|(g, _)| *g == v) {
            Some((_, members)) => members.push(row),
            None => groups.push((v, vec![row])),
        }
    }
    groups
}

/// Whitespace-delimited `x median p20 p80` lines, one per axis value,
/// sorted by x.
pub fn emit_plot_data(
    rows: &[ResultRow],
    axis: SweepAxis,
    stat: &str,
) -> anyhow::Result<String> {
    if rows.is_empty() {
        anyhow::bail!("no rows to plot");
    }
    let mut groups = group_by_axis(rows, axis);
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut out = String::new();
    for (x, members) in groups {
        let mut ys = members
            .iter()
            .map(|r| stat_value(r, stat))
            .collect::<anyhow::Result<Vec<f64>>>()?;
        ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.push_str(&format!(
            "{x} {} {} {}\n",
            percentile_nearest_rank(&ys, 0.5),
            percentile_nearest_rank(&ys, 0.2),
            percentile_nearest_rank(&ys, 0.8)
        ));
    }
    Ok(out)
}

fn write_summary(config: &ExperimentConfig, rows: &[ResultRow]) -> anyhow::Result<()> {
    let path = format!("{}.summary.csv", config.out);
    let mut file = std::fs::File::create(&path).with_context(|| format!("creating {path}"))?;
    writeln!(file, "{FORMAT_VERSION}")?;
    writeln!(file, "axis,value,metric,median,p20,p80")?;
    let axis = config.sweep.axis;
    let mut groups = group_by_axis(rows, axis);
    groups.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for (value, members) in groups {
        for metric in ["chi", "cost", "t_nn_ns", "t_cd_ns", "cd_in_lp"] {
            let mut ys = members
                .iter()
                .map(|r| stat_value(r, metric))
                .collect::<anyhow::Result<Vec<f64>>>()?;
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            writeln!(
                file,
                "{},{},{},{},{},{}",
                axis.name(),
                value,
                metric,
                percentile_nearest_rank(&ys, 0.5),
                percentile_nearest_rank(&ys, 0.2),
                percentile_nearest_rank(&ys, 0.8)
            )?;
        }
    }
    Ok(())
}
