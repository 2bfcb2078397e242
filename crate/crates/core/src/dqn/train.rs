use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{td_batch, Mlp};
use super::replay::{ReplayBuffer, Transition};
use super::{mlp_update, DqnConfig, DqnError, EnvState, Environment, Optimizer};
use crate::contest::ContestOutcome;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub mean_reward: f64,
    /// Total loss of the state the episode ended in.
    pub total_loss: f64,
    /// Exploration rate used during the episode.
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub policy: Mlp,
    pub history: Vec<EpisodeRecord>,
    pub updates: usize,
}

/// Index of the highest-valued action; ties go to the lowest index.
pub fn greedy_action(net: &Mlp, env: &Environment, state: &EnvState) -> usize {
    net.argmax(&env.encode(state))
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(
        &mut self,
        net: &mut Mlp,
        batch: &[&Transition],
        target: &Mlp,
        gamma: f64,
        lr: f64,
    ) -> Result<f64, DqnError> {
        let (inputs, actions, targets) = td_batch(batch, target, gamma);
        let (loss, grad) = net.loss_and_gradient(&inputs, &actions, &targets);
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(DqnError::NonFiniteGradient);
        }
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let mut direction = grad;
        for ((g, m), v) in direction.iter_mut().zip(&mut self.m).zip(&mut self.v) {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * *g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * *g * *g;
            *g = (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
        net.apply_gradient(&direction, lr);
        if !net.all_finite() {
            return Err(DqnError::NonFiniteGradient);
        }
        Ok(loss)
    }
}

pub fn train(env: &Environment, cfg: &DqnConfig) -> Result<TrainOutput, DqnError> {
    cfg.validate()?;
    let mut sizes = vec![env.feature_count()];
    sizes.extend(&cfg.hidden_layers);
    sizes.push(env.action_count());

    let mut net = Mlp::new(&sizes, &mut seeds::derive_rng(cfg.seed, seeds::INIT))?;
    let mut target = net.clone();
    let mut explore = seeds::derive_rng(cfg.seed, seeds::EXPLORE);
    let mut sampler = seeds::derive_rng(cfg.seed, seeds::REPLAY);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut adam = (cfg.optimizer == Optimizer::Adam).then(|| Adam::new(net.parameter_count()));
    let start = env.initial_state()?;

    let mut epsilon = cfg.epsilon_start;
    let mut history = Vec::with_capacity(cfg.episodes);
    let mut steps = 0usize;
    let mut updates = 0usize;

    for episode in 1..=cfg.episodes {
        let mut state = start.clone();
        let mut features = env.encode(&state);
        let mut reward_sum = 0.0;
        let mut last: Option<ContestOutcome> = None;
        for _ in 0..cfg.steps_per_episode {
            let action = if explore.random::<f64>() < epsilon {
                explore.random_range(0..env.action_count())
            } else {
                net.argmax(&features)
            };
            let step = env.step(&state, action)?;
            let next_features = env.encode(&step.next);
            reward_sum += step.reward;
            buffer.push(Transition {
                state: features,
                action,
                reward: step.reward,
                next_state: next_features.clone(),
            });

            if let Some(batch) = buffer.sample(&mut sampler, cfg.batch_size) {
                match adam.as_mut() {
                    Some(opt) => {
                        opt.step(&mut net, &batch, &target, cfg.gamma, cfg.learning_rate)?
                    }
                    None => mlp_update(&mut net, &batch, &target, cfg.gamma, cfg.learning_rate)?,
                };
                updates += 1;
            }
            steps += 1;
            if steps.is_multiple_of(cfg.target_sync_period) {
                target.clone_from(&net);
            }

            state = step.next;
            features = next_features;
            last = Some(step.outcome);
        }
        history.push(EpisodeRecord {
            episode,
            mean_reward: reward_sum / cfg.steps_per_episode as f64,
            total_loss: last.map_or(f64::NAN, |o| o.total_loss),
            epsilon,
        });
        epsilon = (epsilon * cfg.epsilon_decay).max(cfg.epsilon_end);
    }

    Ok(TrainOutput {
        policy: net,
        history,
        updates,
    })
}

/// Greedy rollout from the equal split.
#[derive(Debug, Clone)]
pub struct PolicyEvaluation {
    /// Highest-reward state visited, the start included. Earliest wins ties.
    pub best_state: EnvState,
    pub best_reward: f64,
    pub best_outcome: ContestOutcome,
    pub final_state: EnvState,
    pub final_outcome: ContestOutcome,
}

pub fn evaluate_policy(
    net: &Mlp,
    env: &Environment,
    steps: usize,
) -> Result<PolicyEvaluation, DqnError> {
    let mut state = env.initial_state()?;
    let mut outcome = env.evaluate(&state.awards)?;
    let mut best = (
        state.clone(),
        env.reward_for(&state.awards, &outcome),
        outcome.clone(),
    );
    for _ in 0..steps {
        let step = env.step(&state, greedy_action(net, env, &state))?;
        if step.reward > best.1 {
            best = (step.next.clone(), step.reward, step.outcome.clone());
        }
        state = step.next;
        outcome = step.outcome;
    }
    Ok(PolicyEvaluation {
        best_state: best.0,
        best_reward: best.1,
        best_outcome: best.2,
        final_state: state,
        final_outcome: outcome,
    })
}

pub fn write_history_csv<W: Write>(history: &[EpisodeRecord], writer: W) -> Result<(), DqnError> {
    let mut w = csv::Writer::from_writer(writer);
    for rec in history {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}
