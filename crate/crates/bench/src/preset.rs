//! Canned desk-scale experiment families.

use anyhow::bail;

use crate::config::{
    ExperimentConfig, NnKind, PlannerId, ScenarioConfig, StrategyConfig, Sweep, SweepAxis,
};

pub const PRESET_NAMES: &[&str] = &[
    "fig6-rnn",
    "fig6-knn",
    "fig7",
    "fig8",
    "fig9b",
    "chi-growth",
];

/// Returns the documented configuration for a named experiment family.
///
/// - `fig6-rnn` / `fig6-knn`: sPRM* on the hypercube, n = 5000, dimension
///   sweep 2..16, radial vs k-NN connections. The obstacle measure defaults
///   to 0; rerun with `mu` overrides for the other curves.
/// - `fig7`: RRT* over segment soups of growing complexity.
/// - `fig8`: RRT* under a resolution sweep on a fixed soup.
/// - `fig9b`: Lazy-sPRM* on the thin strip compound with the projected
///   radius, snapshotted across a geometric roadmap-size schedule (batch
///   restarts stand in for incremental densification).
/// - `chi-growth`: sPRM* on the 4-D hypercube with doubling roadmap sizes.
pub fn preset(name: &str) -> anyhow::Result<ExperimentConfig> {
    let cfg = match name {
        "fig6-rnn" => ExperimentConfig {
            planner: PlannerId::Sprm,
            scenario: ScenarioConfig::Hypercube { d: 2, mu: 0.0 },
            strategy: StrategyConfig::Radial {
                eta: 2.0,
                heuristic: false,
            },
            nn: NnKind::Tree,
            n_target: 5000,
            iterations: 1000,
            res_fraction: None,
            steer_cap: None,
            goal_bias: 0.0,
            sweep: Sweep {
                axis: SweepAxis::D,
                values: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0],
            },
            seeds: (0..5).collect(),
            out: "fig6-rnn.csv".into(),
        },
        "fig6-knn" => ExperimentConfig {
            strategy: StrategyConfig::Knn { multiplier: 1.0 },
            out: "fig6-knn.csv".into(),
            ..preset("fig6-rnn")?
        },
        "fig7" => ExperimentConfig {
            planner: PlannerId::RrtStar,
            scenario: ScenarioConfig::Soup {
                m: 100,
                inflation: 0.005,
            },
            strategy: StrategyConfig::Radial {
                eta: 1.0,
                heuristic: false,
            },
            nn: NnKind::Tree,
            n_target: 1000,
            iterations: 2000,
            res_fraction: None,
            steer_cap: None,
            goal_bias: 0.0,
            sweep: Sweep {
                axis: SweepAxis::M,
                values: vec![100.0, 400.0, 1600.0],
            },
            seeds: (0..20).collect(),
            out: "fig7.csv".into(),
        },
        "fig8" => ExperimentConfig {
            scenario: ScenarioConfig::Soup {
                m: 400,
                inflation: 0.005,
            },
            sweep: Sweep {
                axis: SweepAxis::ResFraction,
                values: vec![0.01, 0.02, 0.04],
            },
            out: "fig8.csv".into(),
            ..preset("fig7")?
        },
        "fig9b" => ExperimentConfig {
            planner: PlannerId::LazySprm,
            scenario: ScenarioConfig::Strip {
                length: 20.0,
                w2: 0.001,
            },
            strategy: StrategyConfig::Radial {
                eta: 1.0,
                heuristic: true,
            },
            nn: NnKind::Tree,
            n_target: 2000,
            iterations: 1000,
            res_fraction: None,
            steer_cap: None,
            goal_bias: 0.0,
            sweep: Sweep {
                axis: SweepAxis::N,
                values: vec![250.0, 500.0, 1000.0, 2000.0, 4000.0],
            },
            seeds: (0..50).collect(),
            out: "fig9b.csv".into(),
        },
        "chi-growth" => ExperimentConfig {
            planner: PlannerId::Sprm,
            scenario: ScenarioConfig::Hypercube { d: 4, mu: 0.25 },
            strategy: StrategyConfig::Radial {
                eta: 1.0,
                heuristic: false,
            },
            nn: NnKind::Linear,
            n_target: 1000,
            iterations: 1000,
            res_fraction: None,
            steer_cap: None,
            goal_bias: 0.0,
            sweep: Sweep {
                axis: SweepAxis::N,
                values: vec![1600.0, 3200.0, 6400.0, 12800.0],
            },
            seeds: (0..20).collect(),
            out: "chi-growth.csv".into(),
        },
        other => bail!("unknown preset {other:?}; known: {}", PRESET_NAMES.join(", ")),
    };
    Ok(cfg)
}
