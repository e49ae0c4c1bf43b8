//! Experiment configuration: JSON files plus flag overrides.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use mp_core::collision::{ScenarioKind, DEFAULT_INFLATION, DEFAULT_RES_FRACTION};
use mp_core::nn::IndexKind;
use mp_core::planner::ConnectionStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerId {
    Sprm,
    LazySprm,
    RrtStar,
}

impl PlannerId {
    pub fn name(&self) -> &'static str {
        match self {
            PlannerId::Sprm => "sprm",
            PlannerId::LazySprm => "lazy-sprm",
            PlannerId::RrtStar => "rrt-star",
        }
    }
}

impl std::str::FromStr for PlannerId {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sprm" => Ok(PlannerId::Sprm),
            "lazy-sprm" => Ok(PlannerId::LazySprm),
            "rrt-star" => Ok(PlannerId::RrtStar),
            other => bail!("unknown planner {other:?}"),
        }
    }
}

/// JSON-addressable scenario families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioConfig {
    Hypercube {
        d: usize,
        mu: f64,
    },
    Soup {
        m: usize,
        #[serde(default = "default_inflation")]
        inflation: f64,
    },
    Strip {
        length: f64,
        w2: f64,
    },
    Freespace {
        d: usize,
    },
}

fn default_inflation() -> f64 {
    DEFAULT_INFLATION
}

impl ScenarioConfig {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            ScenarioConfig::Hypercube { d, mu } => ScenarioKind::Hypercube { d: *d, mu: *mu },
            ScenarioConfig::Soup { m, inflation } => ScenarioKind::SegmentSoup {
                m: *m,
                inflation: *inflation,
            },
            ScenarioConfig::Strip { length, w2 } => ScenarioKind::Strip {
                length: *length,
                w2: *w2,
            },
            ScenarioConfig::Freespace { d } => ScenarioKind::Freespace { d: *d },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Hypercube { .. } => "hypercube",
            ScenarioConfig::Soup { .. } => "soup",
            ScenarioConfig::Strip { .. } => "strip",
            ScenarioConfig::Freespace { .. } => "freespace",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyConfig {
    Radial {
        #[serde(default = "default_eta")]
        eta: f64,
        #[serde(default)]
        heuristic: bool,
    },
    Knn {
        #[serde(default = "default_multiplier")]
        multiplier: f64,
    },
}

fn default_eta() -> f64 {
    1.0
}

fn default_multiplier() -> f64 {
    1.0
}

impl StrategyConfig {
    /// Resolves to a core strategy; radial strategies pick up the known
    /// free-space measure of the scenario.
    pub fn to_strategy(&self, known_mu_free: Option<f64>) -> ConnectionStrategy {
        match self {
            StrategyConfig::Radial { eta, heuristic } => ConnectionStrategy::Radial {
                eta: *eta,
                mu_free: known_mu_free,
                heuristic: *heuristic,
            },
            StrategyConfig::Knn { multiplier } => ConnectionStrategy::Knn {
                multiplier: *multiplier,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NnKind {
    Linear,
    Tree,
}

impl NnKind {
    pub fn to_index_kind(self) -> IndexKind {
        match self {
            NnKind::Linear => IndexKind::LinearScan,
            NnKind::Tree => IndexKind::MetricTree,
        }
    }
}

impl std::str::FromStr for NnKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(NnKind::Linear),
            "tree" => Ok(NnKind::Tree),
            other => bail!("unknown nn kind {other:?}"),
        }
    }
}

/// The swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    /// Roadmap size target of the batch planners.
    #[serde(rename = "n")]
    N,
    /// Iteration count of the incremental planner.
    #[serde(rename = "N")]
    Iterations,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "m")]
    M,
    #[serde(rename = "res_fraction")]
    ResFraction,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::N => "n",
            SweepAxis::Iterations => "N",
            SweepAxis::D => "d",
            SweepAxis::Mu => "mu",
            SweepAxis::M => "m",
            SweepAxis::ResFraction => "res_fraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

/// One experiment family: planner, scenario, strategy, a single sweep axis
/// with its values, and the seed list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub planner: PlannerId,
    pub scenario: ScenarioConfig,
    pub strategy: StrategyConfig,
    pub nn: NnKind,
    /// Node target for the batch planners.
    #[serde(default = "default_n_target")]
    pub n_target: usize,
    /// Iteration budget for the incremental planner.
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Resolution override as a fraction of the extent.
    #[serde(default)]
    pub res_fraction: Option<f64>,
    /// Extension cap override for the incremental planner.
    #[serde(default)]
    pub steer_cap: Option<f64>,
    #[serde(default)]
    pub goal_bias: f64,
    pub sweep: Sweep,
    pub seeds: Vec<u64>,
    pub out: String,
}

fn default_n_target() -> usize {
    1000
}

fn default_iterations() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.seeds.is_empty() {
            bail!("config needs at least one seed");
        }
        if self.sweep.values.is_empty() {
            bail!("sweep needs at least one value");
        }
        for v in &self.sweep.values {
            match self.sweep.axis {
                SweepAxis::N | SweepAxis::Iterations | SweepAxis::D | SweepAxis::M => {
                    if *v < 1.0 || v.fract() != 0.0 {
                        bail!("axis {} needs positive integers, got {v}", self.sweep.axis.name());
                    }
                }
                SweepAxis::Mu => {
                    if !(0.0..1.0).contains(v) {
                        bail!("mu values must lie in [0, 1), got {v}");
                    }
                    if !matches!(self.scenario, ScenarioConfig::Hypercube { .. }) {
                        bail!("mu sweeps need the hypercube scenario");
                    }
                }
                SweepAxis::ResFraction => {
                    if !(*v > 0.0) {
                        bail!("res_fraction values must be positive, got {v}");
                    }
                }
            }
        }
        if self.sweep.axis == SweepAxis::D
            && !matches!(
                self.scenario,
                ScenarioConfig::Hypercube { .. } | ScenarioConfig::Freespace { .. }
            )
        {
            bail!("d sweeps need the hypercube or freespace scenario");
        }
        if self.sweep.axis == SweepAxis::M && !matches!(self.scenario, ScenarioConfig::Soup { .. })
        {
            bail!("m sweeps need the soup scenario");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
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
                values: vec![100.0, 200.0],
            },
            seeds: vec![0, 1],
            out: "out.csv".into(),
        }
    }

    #[test]
    fn json_round_trip() {
        let cfg = base();
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = base();
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());

        let mut cfg = base();
        cfg.sweep.values = vec![2.5];
        assert!(cfg.validate().is_err());

        let mut cfg = base();
        cfg.sweep.axis = SweepAxis::M;
        assert!(cfg.validate().is_err(), "m sweep on hypercube");
    }

    #[test]
    fn axis_names_round_trip_via_serde() {
        for axis in [
            SweepAxis::N,
            SweepAxis::Iterations,
            SweepAxis::D,
            SweepAxis::Mu,
            SweepAxis::M,
            SweepAxis::ResFraction,
        ] {
            let s = serde_json::to_string(&axis).unwrap();
            let back: SweepAxis = serde_json::from_str(&s).unwrap();
            assert_eq!(axis, back);
        }
    }
}
