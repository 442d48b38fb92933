//! Experiment configuration: a JSON schema with optional fields, resolution
//! of every default, and the fully-explicit lock document written next to
//! the outputs.
//!
//! A config file looks like:
//!
//! ```json
//! {
//!   "environment": { "radio": { "channels": 4 } },
//!   "agent": { "gamma": 0.9 },
//!   "circuit": { "n_layers": 2 },
//!   "seed": 1,
//!   "episodes": 500,
//!   "backend": { "shots": { "shots": 1024, "device": "ibmq-valencia" } },
//!   "output_dir": "runs/radio-4"
//! }
//! ```
//!
//! Only `environment` is required. Unknown keys anywhere are hard errors so
//! a typo cannot silently fall back to a default. Relative paths inside the
//! config (map, pattern, and device files) resolve against the config
//! file's own directory. Resolution inlines referenced files and fills in
//! every default, producing an [`ExperimentConfig`] whose serialized form
//! is the `config.lock.json` artifact: a self-contained record of exactly
//! what the run used.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vqrl_core::device::DeviceProperties;
use vqrl_core::envs::{
    CognitiveRadioEnv, EnvError, EnvOutcome, Environment, FrozenLakeEnv, FrozenLakeMap,
    RadioPattern,
};
use vqrl_core::qsim::NoiseModel;
use vqrl_core::rl::{ActionBackend, AgentConfig, EpsilonSchedule};
use vqrl_core::vqc::{CircuitSpec, Observable};

use crate::LabError;

/// Parsed but unresolved experiment file: everything optional except the
/// environment.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub environment: RawEnvironment,
    #[serde(default)]
    pub agent: RawAgent,
    #[serde(default)]
    pub circuit: RawCircuit,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub episodes: Option<u32>,
    #[serde(default)]
    pub backend: Option<RawBackend>,
    #[serde(default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum RawEnvironment {
    FrozenLake {
        #[serde(default)]
        map_file: Option<String>,
    },
    Radio {
        #[serde(default)]
        channels: Option<usize>,
        #[serde(default)]
        pattern_file: Option<String>,
    },
}

/// Hyperparameter overrides; anything left out takes the environment's
/// preset value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAgent {
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub replay_capacity: Option<usize>,
    #[serde(default)]
    pub target_sync_every: Option<usize>,
    #[serde(default)]
    pub learning_rate: Option<f64>,
    #[serde(default)]
    pub smoothing: Option<f64>,
    #[serde(default)]
    pub denominator_fuzz: Option<f64>,
    #[serde(default)]
    pub epsilon_schedule: Option<EpsilonSchedule>,
    #[serde(default)]
    pub epsilon_init: Option<f64>,
    #[serde(default)]
    pub epsilon_floor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCircuit {
    #[serde(default)]
    pub n_layers: Option<usize>,
    #[serde(default)]
    pub observable: Option<Observable>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum RawBackend {
    Analytic,
    Shots {
        #[serde(default)]
        shots: Option<u32>,
        #[serde(default)]
        device: Option<String>,
        #[serde(default)]
        assignment: Option<Vec<usize>>,
    },
}

/// Everything a run uses, with no implicit values left. Serialized verbatim
/// as `config.lock.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub environment: ResolvedEnvironment,
    pub agent: AgentConfig,
    pub circuit: CircuitSpec,
    pub seed: u64,
    pub episodes: u32,
    pub backend: ResolvedBackend,
    pub output_dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolvedEnvironment {
    FrozenLake {
        /// The four map rows joined with `/`.
        map: String,
        step_cap: u32,
    },
    Radio {
        pattern: RadioPattern,
        step_cap: u32,
        max_collisions: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolvedBackend {
    Analytic,
    Shots {
        shots: u32,
        /// Bundled device name or path, if sampling runs under noise.
        device: Option<String>,
        /// Logical-to-device qubit map; empty when no device is involved.
        assignment: Vec<usize>,
    },
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_EPISODES: u32 = 500;
pub const DEFAULT_SHOTS: u32 = 1024;
pub const DEFAULT_LAYERS: usize = 2;
pub const FROZEN_LAKE_STEP_CAP: u32 = 200;
pub const RADIO_STEP_CAP: u32 = 100;
pub const RADIO_MAX_COLLISIONS: u32 = 3;

fn invalid(message: String) -> LabError {
    LabError::Validation(message)
}

/// Read a file that a config references, resolving relative to the config.
fn read_referenced(base: &Path, file: &str) -> Result<String, LabError> {
    let path = base.join(file);
    fs::read_to_string(&path).map_err(|e| LabError::io("read", &path, e))
}

/// Load a config file and resolve every default.
pub fn load(path: &Path) -> Result<ExperimentConfig, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io("read", path, e))?;
    let raw: RawConfig = serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let default_dir = format!(
        "runs/{}",
        path.file_stem().and_then(|s| s.to_str()).unwrap_or("experiment")
    );
    resolve(raw, base, &default_dir)
}

/// Fill in defaults and inline referenced files.
pub fn resolve(raw: RawConfig, base: &Path, default_dir: &str) -> Result<ExperimentConfig, LabError> {
    let environment = resolve_environment(&raw.environment, base)?;
    let (n_states, n_actions, preset) = match &environment {
        ResolvedEnvironment::FrozenLake { .. } => (16, 4, AgentConfig::frozen_lake()),
        ResolvedEnvironment::Radio { pattern, .. } => {
            let n = pattern.n_channels;
            (n * n, n, AgentConfig::radio())
        }
    };
    let agent = apply_agent_overrides(preset, &raw.agent);
    agent.validate().map_err(|e| invalid(format!("agent config: {e}")))?;

    let n_layers = raw.circuit.n_layers.unwrap_or(DEFAULT_LAYERS);
    let mut circuit = CircuitSpec::for_problem(n_states, n_actions, n_layers)
        .map_err(|e| invalid(format!("circuit: {e}")))?;
    if let Some(observable) = raw.circuit.observable {
        circuit.observable = observable;
    }

    let backend = resolve_backend(raw.backend.as_ref(), base, circuit.n_qubits)?;
    Ok(ExperimentConfig {
        environment,
        agent,
        circuit,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        episodes: raw.episodes.unwrap_or(DEFAULT_EPISODES),
        backend,
        output_dir: raw.output_dir.unwrap_or_else(|| default_dir.to_string()),
    })
}

fn resolve_environment(
    raw: &RawEnvironment,
    base: &Path,
) -> Result<ResolvedEnvironment, LabError> {
    match raw {
        RawEnvironment::FrozenLake { map_file } => {
            let map = match map_file {
                Some(file) => {
                    let text = read_referenced(base, file)?;
                    FrozenLakeMap::parse(&text)
                        .map_err(|e| invalid(format!("map file '{file}': {e}")))?
                }
                None => FrozenLakeMap::default_layout(),
            };
            Ok(ResolvedEnvironment::FrozenLake {
                map: map_rows(&map),
                step_cap: FROZEN_LAKE_STEP_CAP,
            })
        }
        RawEnvironment::Radio { channels, pattern_file } => {
            let pattern = match (channels, pattern_file) {
                (Some(_), Some(_)) => {
                    return Err(invalid(String::from(
                        "radio environment: give either 'channels' or 'pattern_file', not both",
                    )))
                }
                (None, None) => {
                    return Err(invalid(String::from(
                        "radio environment: 'channels' or 'pattern_file' is required",
                    )))
                }
                (Some(n), None) => RadioPattern::ascending(*n)
                    .map_err(|e| invalid(format!("radio environment: {e}")))?,
                (None, Some(file)) => {
                    let text = read_referenced(base, file)?;
                    let pattern: RadioPattern = serde_json::from_str(&text)
                        .map_err(|e| invalid(format!("pattern file '{file}': {e}")))?;
                    pattern
                        .validate()
                        .map_err(|e| invalid(format!("pattern file '{file}': {e}")))?;
                    pattern
                }
            };
            Ok(ResolvedEnvironment::Radio {
                pattern,
                step_cap: RADIO_STEP_CAP,
                max_collisions: RADIO_MAX_COLLISIONS,
            })
        }
    }
}

fn apply_agent_overrides(mut config: AgentConfig, raw: &RawAgent) -> AgentConfig {
    if let Some(v) = raw.gamma {
        config.gamma = v;
    }
    if let Some(v) = raw.batch_size {
        config.batch_size = v;
    }
    if let Some(v) = raw.replay_capacity {
        config.replay_capacity = v;
    }
    if let Some(v) = raw.target_sync_every {
        config.target_sync_every = v;
    }
    if let Some(v) = raw.learning_rate {
        config.optimizer.learning_rate = v;
    }
    if let Some(v) = raw.smoothing {
        config.optimizer.alpha = v;
    }
    if let Some(v) = raw.denominator_fuzz {
        config.optimizer.eps = v;
    }
    if let Some(v) = raw.epsilon_schedule {
        config.exploration.schedule = v;
    }
    if let Some(v) = raw.epsilon_init {
        config.exploration.epsilon_init = v;
    }
    if let Some(v) = raw.epsilon_floor {
        config.exploration.epsilon_floor = if v > 0.0 { Some(v) } else { None };
    }
    config
}

/// Check a shots backend's device/assignment combination and resolve the
/// qubit assignment (automatically when none is given).
pub fn resolve_backend(
    raw: Option<&RawBackend>,
    base: &Path,
    n_qubits: usize,
) -> Result<ResolvedBackend, LabError> {
    match raw {
        None | Some(RawBackend::Analytic) => Ok(ResolvedBackend::Analytic),
        Some(RawBackend::Shots { shots, device, assignment }) => {
            let shots = shots.unwrap_or(DEFAULT_SHOTS);
            if shots == 0 {
                return Err(invalid(String::from("backend: shots must be at least 1")));
            }
            let assignment = match device {
                None => {
                    if assignment.is_some() {
                        return Err(invalid(String::from(
                            "backend: an assignment needs a device",
                        )));
                    }
                    Vec::new()
                }
                Some(name) => {
                    let props = load_device(base, name)?;
                    match assignment {
                        Some(map) => {
                            props.synthesize_noise_model(map).map_err(|e| {
                                invalid(format!("backend assignment: {e}"))
                            })?;
                            if map.len() != n_qubits {
                                return Err(invalid(format!(
                                    "backend assignment maps {} qubits but the circuit has {n_qubits}",
                                    map.len()
                                )));
                            }
                            map.clone()
                        }
                        None => props
                            .auto_assignment(n_qubits)
                            .map_err(|e| invalid(format!("device '{name}': {e}")))?,
                    }
                }
            };
            Ok(ResolvedBackend::Shots { shots, device: device.clone(), assignment })
        }
    }
}

/// Load a device table: a bundled name first, a path otherwise.
pub fn load_device(base: &Path, name: &str) -> Result<DeviceProperties, LabError> {
    let text = match vqrl_core::device::bundled_device(name) {
        Some(bundled) => bundled.to_string(),
        None => read_referenced(base, name)?,
    };
    DeviceProperties::parse(&text).map_err(|e| invalid(format!("device '{name}': {e}")))
}

/// Either benchmark environment behind one concrete type.
#[derive(Debug, Clone)]
pub enum LabEnv {
    Lake(FrozenLakeEnv),
    Radio(CognitiveRadioEnv),
}

impl Environment for LabEnv {
    fn n_states(&self) -> usize {
        match self {
            LabEnv::Lake(env) => env.n_states(),
            LabEnv::Radio(env) => env.n_states(),
        }
    }

    fn n_actions(&self) -> usize {
        match self {
            LabEnv::Lake(env) => env.n_actions(),
            LabEnv::Radio(env) => env.n_actions(),
        }
    }

    fn state(&self) -> usize {
        match self {
            LabEnv::Lake(env) => env.state(),
            LabEnv::Radio(env) => env.state(),
        }
    }

    fn reset(&mut self) -> usize {
        match self {
            LabEnv::Lake(env) => env.reset(),
            LabEnv::Radio(env) => env.reset(),
        }
    }

    fn step(&mut self, action: usize) -> Result<EnvOutcome, EnvError> {
        match self {
            LabEnv::Lake(env) => env.step(action),
            LabEnv::Radio(env) => env.step(action),
        }
    }
}

impl ExperimentConfig {
    /// Instantiate the environment this config describes.
    pub fn build_env(&self) -> Result<LabEnv, LabError> {
        match &self.environment {
            ResolvedEnvironment::FrozenLake { map, .. } => {
                let map = FrozenLakeMap::parse(map)
                    .map_err(|e| invalid(format!("locked map: {e}")))?;
                Ok(LabEnv::Lake(FrozenLakeEnv::new(map)))
            }
            ResolvedEnvironment::Radio { pattern, .. } => {
                pattern.validate().map_err(|e| invalid(format!("locked pattern: {e}")))?;
                Ok(LabEnv::Radio(CognitiveRadioEnv::new(pattern.clone())))
            }
        }
    }

    /// Instantiate the action backend, synthesizing device noise if asked.
    pub fn build_action_backend(&self, base: &Path) -> Result<ActionBackend, LabError> {
        action_backend(&self.backend, base)
    }
}

/// Instantiate a resolved backend, synthesizing device noise if asked.
pub fn action_backend(resolved: &ResolvedBackend, base: &Path) -> Result<ActionBackend, LabError> {
    match resolved {
        ResolvedBackend::Analytic => Ok(ActionBackend::Analytic),
        ResolvedBackend::Shots { shots, device, assignment } => {
            let noise = match device {
                None => None,
                Some(name) => Some(synthesize_noise(base, name, assignment)?),
            };
            Ok(ActionBackend::Shots { shots: *shots, noise })
        }
    }
}

/// Build the noise model for a named device and explicit assignment.
pub fn synthesize_noise(
    base: &Path,
    device: &str,
    assignment: &[usize],
) -> Result<NoiseModel, LabError> {
    let props = load_device(base, device)?;
    props
        .synthesize_noise_model(assignment)
        .map_err(|e| invalid(format!("device '{device}': {e}")))
}

/// Render a map back into its row text (rows joined with `/`).
pub fn map_rows(map: &FrozenLakeMap) -> String {
    use vqrl_core::envs::Cell;
    let mut rows = String::new();
    for row in 0..4 {
        if row > 0 {
            rows.push('/');
        }
        for col in 0..4 {
            let cell = map.cell(row * 4 + col).expect("indices stay in range");
            rows.push(match cell {
                Cell::Start => 'S',
                Cell::Frozen => 'F',
                Cell::Hole => 'H',
                Cell::Goal => 'G',
            });
        }
    }
    rows
}

/// Pretty-printed lock document for this resolved config.
pub fn lock_document(config: &ExperimentConfig) -> Result<String, LabError> {
    serde_json::to_string_pretty(config)
        .map_err(|e| LabError::Runtime(format!("serializing config lock: {e}")))
}

/// Parse a lock document back.
pub fn parse_lock(text: &str) -> Result<ExperimentConfig, LabError> {
    serde_json::from_str(text).map_err(|e| invalid(format!("config lock: {e}")))
}
