//! Dense-table Q-learning and SARSA baselines.
//!
//! Both walk the same epsilon-greedy loop as the deep agent but update a
//! `|S| x |A|` table directly: Q-learning bootstraps off the greedy value of
//! the successor state, SARSA off the action it actually takes next. They
//! exist to reproduce the classical baseline scores and the parameter-count
//! comparison (a table costs `|S| * |A|` entries where the circuit needs a
//! handful of angles).

use alloc::vec;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    argmax, rolling_stats_100, select_action, EpisodeRecord, ExplorationSchedule, RlError,
};
use crate::envs::Environment;

/// Dense state-action value table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    /// All-zero table.
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        QTable { n_states, n_actions, values: vec![0.0; n_states * n_actions] }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Total number of stored entries (`|S| * |A|`).
    pub fn entry_count(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.n_actions + action] = value;
    }

    /// Q-values of every action in `state`.
    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.n_actions..(state + 1) * self.n_actions]
    }

    /// Greedy action in `state` (lowest index on ties).
    pub fn greedy_action(&self, state: usize) -> usize {
        argmax(self.row(state))
    }

    /// Largest Q-value in `state`.
    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Which bootstrap the tabular update uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bootstrap {
    /// Off-policy: `max_a Q(s', a)`.
    GreedyMax,
    /// On-policy: `Q(s', a')` for the action actually selected next.
    NextAction,
}

/// Tabular Q-learning: `Q(s,a) += alpha * (r + gamma * max_a' Q(s',a') - Q(s,a))`.
pub fn q_learning_baseline(
    env: &mut impl Environment,
    alpha: f64,
    gamma: f64,
    exploration: &ExplorationSchedule,
    episodes: u32,
    seed: u64,
) -> Result<(QTable, Vec<EpisodeRecord>), RlError> {
    run_tabular(env, alpha, gamma, exploration, episodes, seed, Bootstrap::GreedyMax)
}

/// Tabular SARSA: `Q(s,a) += alpha * (r + gamma * Q(s',a') - Q(s,a))` with
/// `a'` the epsilon-greedy action taken from `s'`.
pub fn sarsa_baseline(
    env: &mut impl Environment,
    alpha: f64,
    gamma: f64,
    exploration: &ExplorationSchedule,
    episodes: u32,
    seed: u64,
) -> Result<(QTable, Vec<EpisodeRecord>), RlError> {
    run_tabular(env, alpha, gamma, exploration, episodes, seed, Bootstrap::NextAction)
}

fn run_tabular(
    env: &mut impl Environment,
    alpha: f64,
    gamma: f64,
    exploration: &ExplorationSchedule,
    episodes: u32,
    seed: u64,
    bootstrap: Bootstrap,
) -> Result<(QTable, Vec<EpisodeRecord>), RlError> {
    let mut table = QTable::zeros(env.n_states(), env.n_actions());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut epsilon = exploration.epsilon_init;
    let mut log = Vec::with_capacity(episodes as usize);
    let mut rewards = Vec::with_capacity(episodes as usize);
    for episode in 0..episodes {
        let episode_epsilon = epsilon;
        let mut state = env.reset();
        let mut action = select_action(table.row(state), epsilon, &mut rng)?;
        let mut total_reward = 0.0;
        let mut steps = 0u32;
        loop {
            let outcome = env.step(action)?;
            total_reward += outcome.reward;
            steps += 1;
            // The on-policy successor action is chosen before the update so
            // both variants see the same table state when they bootstrap.
            let next_action = if outcome.terminal {
                0
            } else {
                select_action(table.row(outcome.next_state), epsilon, &mut rng)?
            };
            let bootstrap_value = if outcome.terminal {
                0.0
            } else {
                match bootstrap {
                    Bootstrap::GreedyMax => table.max_value(outcome.next_state),
                    Bootstrap::NextAction => table.get(outcome.next_state, next_action),
                }
            };
            let current = table.get(state, action);
            let target = outcome.reward + gamma * bootstrap_value;
            table.set(state, action, current + alpha * (target - current));
            epsilon = exploration.after_step(epsilon);
            if outcome.terminal {
                break;
            }
            state = outcome.next_state;
            action = next_action;
        }
        rewards.push(total_reward);
        let (rolling_mean_100, rolling_std_100) = rolling_stats_100(&rewards);
        log.push(EpisodeRecord {
            episode,
            total_reward,
            steps,
            rolling_mean_100,
            rolling_std_100,
            epsilon: episode_epsilon,
        });
        epsilon = exploration.after_episode(epsilon, episode);
    }
    Ok((table, log))
}
