//! Experiment configuration file.

use std::path::Path;

use elastic_core::analysis::Weighting;
use elastic_core::engine::{Mode, Observable};
use elastic_core::majorant::EnvironmentLaw;
use elastic_core::model::{Interaction, SystemParams};
use elastic_core::stationary::{TimeScale, DEFAULT_MAX_CYCLE};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Absent only for `random-env`, which samples its own parameters.
    pub params: Option<SystemParams>,
    #[serde(default)]
    pub sim: Option<SimBlock>,
    #[serde(default)]
    pub stationary: Option<StationaryBlock>,
    #[serde(default)]
    pub reversibility: Option<ReversibilityBlock>,
    #[serde(default)]
    pub random_env: Option<RandomEnvBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    /// Defaults to all particles stacked at 0.
    pub initial: Option<Vec<i64>>,
    pub labelled_initial: Option<Vec<i64>>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub events: Option<u64>,
    pub time: Option<f64>,
    pub stride_events: Option<u64>,
    pub stride_time: Option<f64>,
    #[serde(default = "default_observables")]
    pub observables: Vec<Observable>,
    pub replicas: Option<u64>,
}

fn default_mode() -> Mode {
    Mode::Elastic
}

fn default_observables() -> Vec<Observable> {
    vec![Observable::Positions, Observable::Gaps, Observable::Spans, Observable::Com, Observable::CloudGaps]
}

impl Default for SimBlock {
    fn default() -> Self {
        SimBlock {
            initial: None,
            labelled_initial: None,
            mode: default_mode(),
            events: None,
            time: None,
            stride_events: None,
            stride_time: None,
            observables: default_observables(),
            replicas: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryBlock {
    #[serde(default = "default_weighting")]
    pub weighting: Weighting,
    /// Reference states with smaller mass are lumped together for the TV distance.
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
}

fn default_weighting() -> Weighting {
    Weighting::Time
}

fn default_cutoff() -> f64 {
    1e-9
}

impl Default for StationaryBlock {
    fn default() -> Self {
        StationaryBlock {
            weighting: default_weighting(),
            cutoff: default_cutoff(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReversibilityBlock {
    #[serde(default = "default_interaction")]
    pub interaction: Interaction,
    #[serde(default)]
    pub time: TimeScale,
    #[serde(default = "default_truncation")]
    pub truncation: i64,
    #[serde(default = "default_max_cycle")]
    pub max_cycle_length: usize,
    /// Optional explicit cycle of gap states to evaluate.
    pub cycle: Option<Vec<Vec<i64>>>,
}

fn default_interaction() -> Interaction {
    Interaction::Elastic
}

fn default_truncation() -> i64 {
    2
}

fn default_max_cycle() -> usize {
    DEFAULT_MAX_CYCLE
}

impl Default for ReversibilityBlock {
    fn default() -> Self {
        ReversibilityBlock {
            interaction: default_interaction(),
            time: TimeScale::Continuous,
            truncation: default_truncation(),
            max_cycle_length: default_max_cycle(),
            cycle: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomEnvBlock {
    pub n: usize,
    #[serde(default = "default_env_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub law: EnvironmentLaw,
}

fn default_env_replicas() -> u64 {
    1000
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    pub fn params(&self) -> Result<&SystemParams, CliError> {
        self.params
            .as_ref()
            .ok_or_else(|| CliError::config("config has no \"params\" block"))
    }
}
