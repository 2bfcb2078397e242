//! Q-learning over award settings.

mod action;
mod checkpoint;
mod env;
mod mlp;
mod replay;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contest::ContestError;

pub use action::{apply_action, enumerate_actions, Action};
pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use env::{reward, EnvState, Environment, RewardMode, Step, REWARD_LOSS_FLOOR};
pub use mlp::{mlp_update, td_batch, td_targets, Mlp};
pub use replay::{ReplayBuffer, Transition};
pub use train::{
    evaluate_policy, greedy_action, train, write_history_csv, EpisodeRecord, PolicyEvaluation,
    TrainOutput,
};

#[derive(Debug, Error)]
pub enum DqnError {
    #[error("action index {0} is out of range")]
    UnknownAction(usize),
    #[error(transparent)]
    Contest(#[from] ContestError),
    #[error("non-finite loss or gradient; update aborted")]
    NonFiniteGradient,
    #[error("update batch is empty")]
    EmptyBatch,
    #[error("invalid layer sizes {0:?}")]
    BadShape(Vec<usize>),
    #[error("expected {expected} parameters, found {found}")]
    ParameterCount { expected: usize, found: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DqnConfig {
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Multiplied into epsilon after every episode.
    pub epsilon_decay: f64,
    /// In environment steps.
    pub target_sync_period: usize,
    pub reward_scale: f64,
    pub reward_mode: RewardMode,
    pub hidden_layers: Vec<usize>,
    pub optimizer: Optimizer,
    /// Supplied by the caller rather than read from config files.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            episodes: 500,
            steps_per_episode: 100,
            batch_size: 64,
            buffer_capacity: 10_000,
            gamma: 0.9,
            learning_rate: 1e-3,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay: 0.995,
            target_sync_period: 100,
            reward_scale: 1.0,
            reward_mode: RewardMode::Strict,
            hidden_layers: vec![64, 64],
            optimizer: Optimizer::Sgd,
            seed: 0,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<(), DqnError> {
        let bad = |m: &str| Err(DqnError::InvalidConfig(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must be in [0, 1)");
        }
        for (name, e) in [
            ("epsilon_start", self.epsilon_start),
            ("epsilon_end", self.epsilon_end),
        ] {
            if !(e > 0.0 && e <= 1.0) {
                return bad(&format!("{name} must be in (0, 1]"));
            }
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return bad("epsilon_decay must be in (0, 1]");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.buffer_capacity < self.batch_size {
            return bad("buffer_capacity must hold at least one batch");
        }
        if self.target_sync_period == 0 {
            return bad("target_sync_period must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if !(self.reward_scale.is_finite() && self.reward_scale > 0.0) {
            return bad("reward_scale must be positive");
        }
        if self.hidden_layers.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        if self.steps_per_episode == 0 {
            return bad("steps_per_episode must be at least 1");
        }
        Ok(())
    }
}
