//! Deep Q-learning on the variational circuit, plus tabular baselines.
//!
//! The training loop is the classic one: act epsilon-greedily, store the
//! transition in a bounded FIFO replay buffer, sample a minibatch, regress
//! the selected-action Q-values onto one-step TD targets computed from a
//! periodically synchronized target copy of the model, and descend the MSE
//! with RMSprop. Gradients of the circuit come from the exact
//! parameter-shift rule, so no finite differences enter training.
//!
//! Exploration uses one of two decay schedules: a per-episode rule
//! `eps <- eps / (episode/100 + 1)` (used on the gridworld) and a per-step
//! geometric rule `eps <- 0.99 * eps` (used on the radio task), both
//! optionally clamped to a small floor so late training never becomes fully
//! greedy.
//!
//! [`tabular`] holds Q-learning and SARSA baselines over a dense table for
//! comparing parameter counts and learning behavior against the circuit.

mod agent;
mod optimizer;
pub mod tabular;

pub use agent::{greedy_episode, train, ActionBackend, DqnAgent, StepReport, TrainResult};
pub use optimizer::{OptimizerConfig, RmsProp};
pub use tabular::{q_learning_baseline, sarsa_baseline, QTable};

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::EnvError;
use crate::vqc::{Backend, VqcError, VqcModel};

/// Errors from agent configuration or training.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RlError {
    #[error("cannot select an action from an empty Q-value vector")]
    EmptyQValues,
    #[error("epsilon {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
    #[error("gradient entry {index} is not finite at optimizer step {step}")]
    NonFiniteGradient { step: u64, index: usize },
    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid agent config: {0}")]
    ConfigInvalid(String),
    #[error("environment fault: {0}")]
    Env(#[from] EnvError),
    #[error("circuit fault: {0}")]
    Circuit(#[from] VqcError),
}

/// One stored environment interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    pub terminal: bool,
}

/// Bounded FIFO of transitions: pushing beyond capacity evicts the oldest.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer { capacity, entries: VecDeque::with_capacity(capacity) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, transition: Transition) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(transition);
    }

    /// Oldest-to-newest iteration.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.entries.iter()
    }

    /// Draw `batch_size` stored transitions uniformly without replacement
    /// (partial Fisher-Yates over the index range).
    pub fn sample(&self, batch_size: usize, rng: &mut impl Rng) -> Vec<Transition> {
        let mut indices: Vec<usize> = (0..self.entries.len()).collect();
        let draws = batch_size.min(indices.len());
        for i in 0..draws {
            let j = rng.random_range(i..indices.len());
            indices.swap(i, j);
        }
        indices[..draws].iter().map(|&i| self.entries[i]).collect()
    }
}

/// How exploration decays over training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `eps <- eps / (episode/100 + 1)` once per finished episode, with the
    /// integer quotient `episode/100`: epsilon holds steady through the first
    /// hundred episodes, then the running division compounds.
    PerEpisodeDecay,
    /// `eps <- 0.99 * eps` after every environment step.
    PerStepGeometric,
}

/// Exploration schedule with its starting value and optional floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationSchedule {
    pub schedule: EpsilonSchedule,
    pub epsilon_init: f64,
    /// Smallest epsilon ever used; `None` lets the schedules decay
    /// unboundedly.
    pub epsilon_floor: Option<f64>,
}

impl ExplorationSchedule {
    fn clamp(&self, epsilon: f64) -> f64 {
        match self.epsilon_floor {
            Some(floor) => epsilon.max(floor),
            None => epsilon,
        }
    }

    /// Decay to apply when an episode finishes (its index counts from 0).
    pub fn after_episode(&self, epsilon: f64, episode: u32) -> f64 {
        match self.schedule {
            EpsilonSchedule::PerEpisodeDecay => {
                self.clamp(epsilon_update_frozenlake(epsilon, episode))
            }
            EpsilonSchedule::PerStepGeometric => epsilon,
        }
    }

    /// Decay to apply after every environment step.
    pub fn after_step(&self, epsilon: f64) -> f64 {
        match self.schedule {
            EpsilonSchedule::PerEpisodeDecay => epsilon,
            EpsilonSchedule::PerStepGeometric => self.clamp(epsilon_update_radio(epsilon)),
        }
    }

    fn validate(&self) -> Result<(), RlError> {
        if !(0.0..=1.0).contains(&self.epsilon_init) {
            return Err(RlError::EpsilonOutOfRange(self.epsilon_init));
        }
        if let Some(floor) = self.epsilon_floor {
            if !(0.0..=1.0).contains(&floor) {
                return Err(RlError::EpsilonOutOfRange(floor));
            }
        }
        Ok(())
    }
}

/// Everything the deep agent needs beyond the circuit itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    /// Discount factor in (0, 1].
    pub gamma: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Copy the main parameters into the target network every this many
    /// gradient-bearing environment steps.
    pub target_sync_every: usize,
    pub exploration: ExplorationSchedule,
    pub optimizer: OptimizerConfig,
}

impl AgentConfig {
    /// Defaults for the gridworld: small replay, per-episode exploration
    /// decay.
    pub fn frozen_lake() -> Self {
        AgentConfig {
            gamma: 0.99,
            batch_size: 5,
            replay_capacity: 80,
            target_sync_every: 20,
            exploration: ExplorationSchedule {
                schedule: EpsilonSchedule::PerEpisodeDecay,
                epsilon_init: 1.0,
                epsilon_floor: Some(0.01),
            },
            optimizer: OptimizerConfig::default(),
        }
    }

    /// Defaults for the radio task: larger replay, per-step geometric decay.
    pub fn radio() -> Self {
        AgentConfig {
            replay_capacity: 1000,
            exploration: ExplorationSchedule {
                schedule: EpsilonSchedule::PerStepGeometric,
                epsilon_init: 1.0,
                epsilon_floor: Some(0.01),
            },
            ..Self::frozen_lake()
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(RlError::ConfigInvalid(alloc::format!(
                "gamma {} outside (0, 1]",
                self.gamma
            )));
        }
        if self.batch_size == 0 {
            return Err(RlError::ConfigInvalid("batch_size must be positive".into()));
        }
        if self.batch_size > self.replay_capacity {
            return Err(RlError::ConfigInvalid(alloc::format!(
                "batch_size {} exceeds replay_capacity {}",
                self.batch_size,
                self.replay_capacity
            )));
        }
        if self.target_sync_every == 0 {
            return Err(RlError::ConfigInvalid("target_sync_every must be positive".into()));
        }
        self.exploration.validate()?;
        self.optimizer.validate()?;
        Ok(())
    }
}

/// Epsilon-greedy action selection: with probability `epsilon` a uniform
/// random action, otherwise the argmax of `q_values` with ties broken by the
/// lowest index.
pub fn select_action(
    q_values: &[f64],
    epsilon: f64,
    rng: &mut impl Rng,
) -> Result<usize, RlError> {
    if q_values.is_empty() {
        return Err(RlError::EmptyQValues);
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(RlError::EpsilonOutOfRange(epsilon));
    }
    if rng.random::<f64>() < epsilon {
        return Ok(rng.random_range(0..q_values.len()));
    }
    Ok(argmax(q_values))
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-episode exploration decay used on the gridworld. The divisor uses the
/// integer quotient `episode/100`, so epsilon stays at its initial value for
/// the first hundred episodes (pure exploration while the replay signal
/// builds up) and the compounding division collapses it quickly afterwards.
pub fn epsilon_update_frozenlake(epsilon: f64, episode: u32) -> f64 {
    epsilon / ((episode / 100) as f64 + 1.0)
}

/// Per-step geometric exploration decay used on the radio task.
pub fn epsilon_update_radio(epsilon: f64) -> f64 {
    0.99 * epsilon
}

/// One-step TD targets for a minibatch: `y = r` on terminal transitions,
/// otherwise `y = r + gamma * max_a Q_target(s', a)`, with the target
/// network evaluated analytically.
pub fn td_target(
    batch: &[Transition],
    target_model: &VqcModel,
    gamma: f64,
) -> Result<Vec<f64>, RlError> {
    let mut best_next: BTreeMap<usize, f64> = BTreeMap::new();
    let mut targets = Vec::with_capacity(batch.len());
    for transition in batch {
        if transition.terminal {
            targets.push(transition.reward);
            continue;
        }
        let max_q = match best_next.get(&transition.next_state) {
            Some(&q) => q,
            None => {
                let q_values = target_model.forward(transition.next_state, Backend::Analytic)?;
                let max_q = q_values[argmax(&q_values)];
                best_next.insert(transition.next_state, max_q);
                max_q
            }
        };
        targets.push(transition.reward + gamma * max_q);
    }
    Ok(targets)
}

/// Mean-squared TD error of a minibatch and its gradient with respect to the
/// flattened parameters (rotation angles then biases).
///
/// The loss is `L = (1/B) sum_j (y_j - Q(s_j, a_j))^2` and only the taken
/// action's output contributes per transition; its circuit gradient comes
/// from the parameter-shift rule. Repeated `(state, action)` pairs in the
/// batch are evaluated once.
pub fn batch_loss_grad(
    model: &VqcModel,
    batch: &[Transition],
    targets: &[f64],
) -> Result<(f64, Vec<f64>), RlError> {
    if batch.len() != targets.len() {
        return Err(RlError::ShapeMismatch { expected: batch.len(), got: targets.len() });
    }
    let n_params = model.spec().param_count();
    let mut q_cache: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    let mut grad_cache: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let mut loss = 0.0;
    let mut grad = alloc::vec![0.0; n_params];
    let scale = 1.0 / batch.len() as f64;
    for (transition, &y) in batch.iter().zip(targets) {
        let q_values = match q_cache.get(&transition.state) {
            Some(q) => q,
            None => {
                let q = model.forward(transition.state, Backend::Analytic)?;
                q_cache.entry(transition.state).or_insert(q)
            }
        };
        let q_sa = q_values[transition.action];
        let residual = q_sa - y;
        loss += scale * residual * residual;

        let key = (transition.state, transition.action);
        let q_grad = match grad_cache.get(&key) {
            Some(g) => g,
            None => {
                let g = model.parameter_shift_grad(transition.state, transition.action)?;
                let flat: Vec<f64> =
                    g.thetas.iter().chain(g.bias.iter()).copied().collect();
                grad_cache.entry(key).or_insert(flat)
            }
        };
        // d/dp (Q - y)^2 = 2 (Q - y) dQ/dp.
        for (slot, &dq) in grad.iter_mut().zip(q_grad) {
            *slot += scale * 2.0 * residual * dq;
        }
    }
    Ok((loss, grad))
}

/// One row of the per-episode training log.
///
/// `rolling_mean_100`/`rolling_std_100` summarize the total rewards of the
/// most recent up-to-100 episodes including this one (population standard
/// deviation). `epsilon` is the exploration rate in force during the
/// episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u32,
    pub total_reward: f64,
    pub steps: u32,
    pub rolling_mean_100: f64,
    pub rolling_std_100: f64,
    pub epsilon: f64,
}

/// Mean and population standard deviation of the trailing window (at most
/// 100 entries) of `history`.
pub fn rolling_stats_100(history: &[f64]) -> (f64, f64) {
    let window = &history[history.len().saturating_sub(100)..];
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let var = window.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}
