use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::action::{apply_action, enumerate_actions, Action};
use super::DqnError;
use crate::contest::{
    simulate_with_awards, AwardSetting, ContestOutcome, PopulationModel, ScenarioConfig,
};

/// Loss sums below this are treated as this when computing the reward.
pub const REWARD_LOSS_FLOOR: f64 = 1e-9;

/// Which states earn no reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardMode {
    /// Zero when the budget is exceeded or the prizes do not sum to the pool.
    #[default]
    Strict,
    /// Zero when total effort is *below* the budget or the prizes exceed the
    /// pool.
    BudgetFloor,
}

impl FromStr for RewardMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(RewardMode::Strict),
            "budget-floor" => Ok(RewardMode::BudgetFloor),
            other => Err(format!("unknown reward mode `{other}`")),
        }
    }
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RewardMode::Strict => "strict",
            RewardMode::BudgetFloor => "budget-floor",
        })
    }
}

fn pool_matches(sum: f64, pool: f64) -> bool {
    (sum - pool).abs() <= 1e-9 * pool.abs().max(1.0)
}

/// Requirement-aware reward: zero on violating states, otherwise `scale`
/// divided by the total loss.
pub fn reward(
    efforts: &[u32],
    awards: &[f64],
    losses: &[f64],
    budget: u32,
    pool: f64,
    mode: RewardMode,
    scale: f64,
) -> f64 {
    let effort_sum: u64 = efforts.iter().map(|&f| f as u64).sum();
    let award_sum: f64 = awards.iter().sum();
    let violated = match mode {
        RewardMode::Strict => effort_sum > budget as u64 || !pool_matches(award_sum, pool),
        RewardMode::BudgetFloor => {
            effort_sum < budget as u64 || (award_sum > pool && !pool_matches(award_sum, pool))
        }
    };
    if violated {
        return 0.0;
    }
    let total: f64 = losses.iter().sum();
    scale / total.max(REWARD_LOSS_FLOOR)
}

/// What the agent observes: the current prizes and the efforts they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub awards: Vec<f64>,
    pub efforts: Vec<u32>,
}

/// Result of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub next: EnvState,
    pub reward: f64,
    pub outcome: ContestOutcome,
}

/// The award-setting MDP over a fixed scenario.
#[derive(Debug, Clone)]
pub struct Environment {
    scenario: ScenarioConfig,
    population: PopulationModel,
    pool: f64,
    mode: RewardMode,
    reward_scale: f64,
    actions: Vec<Action>,
}

impl Environment {
    pub fn new(
        scenario: ScenarioConfig,
        mode: RewardMode,
        reward_scale: f64,
    ) -> Result<Self, DqnError> {
        let population = scenario.population()?;
        let pool = scenario.pool();
        let actions = enumerate_actions(scenario.len());
        Ok(Self {
            scenario,
            population,
            pool,
            mode,
            reward_scale,
            actions,
        })
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn pool(&self) -> f64 {
        self.pool
    }

    /// Width of the encoded state.
    pub fn feature_count(&self) -> usize {
        2 * self.scenario.len()
    }

    /// Runs the contest under `awards`.
    pub fn evaluate(&self, awards: &[f64]) -> Result<ContestOutcome, DqnError> {
        let setting = AwardSetting::sorted(awards.to_vec())?;
        Ok(simulate_with_awards(
            &self.scenario,
            &setting,
            &self.population,
        )?)
    }

    pub fn reward_for(&self, awards: &[f64], outcome: &ContestOutcome) -> f64 {
        reward(
            &outcome.efforts,
            awards,
            &outcome.per_user_loss,
            self.scenario.budget,
            self.pool,
            self.mode,
            self.reward_scale,
        )
    }

    /// Equal split of the pool and the efforts it induces.
    pub fn initial_state(&self) -> Result<EnvState, DqnError> {
        let n = self.scenario.len();
        let awards = vec![self.pool / n as f64; n];
        let outcome = self.evaluate(&awards)?;
        Ok(EnvState {
            awards,
            efforts: outcome.efforts,
        })
    }

    pub fn step(&self, state: &EnvState, action: usize) -> Result<Step, DqnError> {
        let action = self
            .actions
            .get(action)
            .ok_or(DqnError::UnknownAction(action))?;
        let awards = apply_action(&state.awards, action);
        let outcome = self.evaluate(&awards)?;
        let reward = self.reward_for(&awards, &outcome);
        Ok(Step {
            next: EnvState {
                awards,
                efforts: outcome.efforts.clone(),
            },
            reward,
            outcome,
        })
    }

    /// Network input: prizes over the pool, then efforts over native rates.
    pub fn encode(&self, state: &EnvState) -> Vec<f64> {
        let pool = if self.pool > 0.0 { self.pool } else { 1.0 };
        state
            .awards
            .iter()
            .map(|r| r / pool)
            .chain(
                state
                    .efforts
                    .iter()
                    .zip(&self.scenario.contestants)
                    .map(|(&f, c)| f as f64 / c.native_rate() as f64),
            )
            .collect()
    }
}
