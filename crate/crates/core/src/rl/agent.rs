//! The deep Q-learning loop binding circuit, environment, replay, and
//! optimizer together.

use alloc::vec::Vec;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    batch_loss_grad, rolling_stats_100, select_action, td_target, AgentConfig, EpisodeRecord,
    ReplayBuffer, RlError, RmsProp, Transition,
};
use crate::envs::Environment;
use crate::qsim::NoiseModel;
use crate::vqc::{Backend, CircuitSpec, VqcModel};

/// How the agent evaluates Q-values when *acting*. Gradient steps and TD
/// targets always use the analytic backend; a shot-based action backend only
/// injects sampling (and optionally hardware-style) noise into the behavior
/// policy.
#[derive(Debug, Clone)]
pub enum ActionBackend {
    Analytic,
    Shots { shots: u32, noise: Option<NoiseModel> },
}

impl ActionBackend {
    /// Materialize a circuit backend, drawing a fresh sampling seed from the
    /// training RNG when shots are involved.
    fn instantiate(&self, rng: &mut ChaCha8Rng) -> Backend<'_> {
        match self {
            ActionBackend::Analytic => Backend::Analytic,
            ActionBackend::Shots { shots, noise } => {
                Backend::Shots { shots: *shots, seed: rng.next_u64(), noise: noise.as_ref() }
            }
        }
    }
}

/// What one environment step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub transition: Transition,
    /// Minibatch loss, once the buffer holds at least one batch.
    pub loss: Option<f64>,
    /// Whether the target network was synchronized after this step.
    pub synced: bool,
}

/// The learner: main and target models, replay buffer, optimizer, and the
/// exploration state.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    model: VqcModel,
    target: VqcModel,
    buffer: ReplayBuffer,
    optimizer: RmsProp,
    config: AgentConfig,
    action_backend: ActionBackend,
    epsilon: f64,
    global_step: u64,
    rng: ChaCha8Rng,
}

impl DqnAgent {
    /// Set up a fresh agent: random circuit parameters, target synchronized
    /// with the main model, empty buffer, zeroed optimizer accumulator. All
    /// randomness (initialization, exploration, minibatch sampling, shot
    /// seeds) flows from `seed`.
    pub fn new(
        spec: CircuitSpec,
        config: AgentConfig,
        action_backend: ActionBackend,
        seed: u64,
    ) -> Result<Self, RlError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = VqcModel::init_random(spec, &mut rng)?;
        let n_params = model.spec().param_count();
        Ok(DqnAgent {
            target: model.clone(),
            model,
            buffer: ReplayBuffer::new(config.replay_capacity),
            optimizer: RmsProp::new(config.optimizer, n_params),
            config,
            action_backend,
            epsilon: config.exploration.epsilon_init,
            global_step: 0,
            rng,
        })
    }

    /// Resume with explicit parameters instead of random initialization.
    pub fn with_model(
        model: VqcModel,
        optimizer: RmsProp,
        config: AgentConfig,
        action_backend: ActionBackend,
        seed: u64,
    ) -> Result<Self, RlError> {
        config.validate()?;
        Ok(DqnAgent {
            target: model.clone(),
            model,
            buffer: ReplayBuffer::new(config.replay_capacity),
            optimizer,
            config,
            action_backend,
            epsilon: config.exploration.epsilon_init,
            global_step: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn model(&self) -> &VqcModel {
        &self.model
    }

    pub fn target_model(&self) -> &VqcModel {
        &self.target
    }

    pub fn optimizer(&self) -> &RmsProp {
        &self.optimizer
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn global_step(&self) -> u64 {
        self.global_step
    }

    /// One interaction with the environment: act epsilon-greedily, store the
    /// transition, and once the buffer can fill a minibatch, run a gradient
    /// step on the TD targets and possibly synchronize the target network.
    pub fn step(&mut self, env: &mut impl Environment) -> Result<StepReport, RlError> {
        let state = env.state();
        let backend = self.action_backend.instantiate(&mut self.rng);
        let q_values = self.model.forward(state, backend)?;
        let action = select_action(&q_values, self.epsilon, &mut self.rng)?;
        let outcome = env.step(action)?;
        let transition = Transition {
            state,
            action,
            reward: outcome.reward,
            next_state: outcome.next_state,
            terminal: outcome.terminal,
        };
        self.buffer.push(transition);

        let loss = if self.buffer.len() >= self.config.batch_size {
            let batch = self.buffer.sample(self.config.batch_size, &mut self.rng);
            let targets = td_target(&batch, &self.target, self.config.gamma)?;
            let (loss, grad) = batch_loss_grad(&self.model, &batch, &targets)?;
            let mut params = self.model.flat_params();
            self.optimizer.update(&mut params, &grad)?;
            self.model.set_flat_params(&params)?;
            Some(loss)
        } else {
            None
        };

        self.global_step += 1;
        self.epsilon = self.config.exploration.after_step(self.epsilon);
        let synced = self.global_step % self.config.target_sync_every as u64 == 0;
        if synced {
            self.target = self.model.clone();
        }
        Ok(StepReport { transition, loss, synced })
    }

    /// Run one full episode and return its total reward and step count.
    pub fn run_episode(&mut self, env: &mut impl Environment) -> Result<(f64, u32), RlError> {
        env.reset();
        let mut total_reward = 0.0;
        let mut steps = 0u32;
        loop {
            let report = self.step(env)?;
            total_reward += report.transition.reward;
            steps += 1;
            if report.transition.terminal {
                return Ok((total_reward, steps));
            }
        }
    }

    /// Apply the per-episode exploration decay for the episode that just
    /// finished.
    pub fn finish_episode(&mut self, episode: u32) {
        self.epsilon = self.config.exploration.after_episode(self.epsilon, episode);
    }
}

/// Everything `train` produces: the trained model, the optimizer state for
/// checkpointing, and the per-episode log.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub model: VqcModel,
    pub optimizer: RmsProp,
    pub log: Vec<EpisodeRecord>,
    pub final_epsilon: f64,
}

/// Train a fresh agent for the given number of episodes and log one record
/// per episode. Deterministic for a fixed seed (with the analytic action
/// backend, bit-for-bit).
pub fn train(
    env: &mut impl Environment,
    spec: CircuitSpec,
    config: &AgentConfig,
    action_backend: &ActionBackend,
    seed: u64,
    episodes: u32,
) -> Result<TrainResult, RlError> {
    let mut agent = DqnAgent::new(spec, *config, action_backend.clone(), seed)?;
    let mut log = Vec::with_capacity(episodes as usize);
    let mut rewards = Vec::with_capacity(episodes as usize);
    for episode in 0..episodes {
        let epsilon = agent.epsilon();
        let (total_reward, steps) = agent.run_episode(env)?;
        rewards.push(total_reward);
        let (rolling_mean_100, rolling_std_100) = rolling_stats_100(&rewards);
        log.push(EpisodeRecord {
            episode,
            total_reward,
            steps,
            rolling_mean_100,
            rolling_std_100,
            epsilon,
        });
        agent.finish_episode(episode);
    }
    Ok(TrainResult {
        model: agent.model.clone(),
        optimizer: agent.optimizer.clone(),
        log,
        final_epsilon: agent.epsilon,
    })
}

/// Greedy rollout of a trained model: one episode, no exploration, no
/// learning. Returns total reward and steps.
pub fn greedy_episode(
    model: &VqcModel,
    env: &mut impl Environment,
    backend: &ActionBackend,
    seed: u64,
) -> Result<(f64, u32), RlError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    env.reset();
    let mut total_reward = 0.0;
    let mut steps = 0u32;
    loop {
        let q_values = model.forward(env.state(), backend.instantiate(&mut rng))?;
        let action = super::argmax(&q_values);
        let outcome = env.step(action)?;
        total_reward += outcome.reward;
        steps += 1;
        if outcome.terminal {
            return Ok((total_reward, steps));
        }
    }
}
