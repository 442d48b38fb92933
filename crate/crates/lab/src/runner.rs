//! Command implementations: everything the CLI does after argument parsing.
//!
//! Each command returns the text it wants on stdout; file artifacts go to
//! the experiment's output directory. Training is deterministic in
//! (config, seed), so rerunning a config produces byte-identical artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use vqrl_core::envs::{
    CognitiveRadioEnv, EnvConfig, Environment, FrozenLakeEnv, FrozenLakeMap, RadioPattern,
};
use vqrl_core::rl::{greedy_episode, train};
use vqrl_core::vqc::{CircuitSpec, VqcModel};

use crate::artifacts::{
    eval_table, save_checkpoint, scores_csv, Checkpoint, EvalRow, OptimizerState,
};
use crate::config::{self, ExperimentConfig, LabEnv, RawBackend};
use crate::LabError;

/// Outcome of one training run, for the stdout summary.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub seed: u64,
    pub episodes: u32,
    pub final_rolling_mean: Option<f64>,
    pub out_dir: PathBuf,
}

impl RunSummary {
    fn line(&self) -> String {
        let mean = match self.final_rolling_mean {
            Some(m) => format!("{m}"),
            None => String::from("NA"),
        };
        format!(
            "seed {}: {} episodes, final rolling mean {}, artifacts in {}",
            self.seed,
            self.episodes,
            mean,
            self.out_dir.display()
        )
    }
}

/// Train one resolved config into `out_dir`: writes `config.lock.json`,
/// `scores.csv`, and `model.json`. `base` anchors relative file references
/// (the config file's directory).
pub fn run_experiment(
    config: &ExperimentConfig,
    base: &Path,
    out_dir: &Path,
) -> Result<RunSummary, LabError> {
    let mut env = config.build_env()?;
    let backend = config.build_action_backend(base)?;
    fs::create_dir_all(out_dir).map_err(|e| LabError::io("create", out_dir, e))?;

    let mut locked = config.clone();
    locked.output_dir = out_dir.display().to_string();
    let lock_path = out_dir.join("config.lock.json");
    fs::write(&lock_path, config::lock_document(&locked)?)
        .map_err(|e| LabError::io("write", &lock_path, e))?;

    let result = train(
        &mut env,
        config.circuit.clone(),
        &config.agent,
        &backend,
        config.seed,
        config.episodes,
    )
    .map_err(|e| LabError::Runtime(format!("training failed: {e}")))?;

    let scores_path = out_dir.join("scores.csv");
    fs::write(&scores_path, scores_csv(&result.log))
        .map_err(|e| LabError::io("write", &scores_path, e))?;

    let checkpoint = Checkpoint {
        model: result.model,
        seed: config.seed,
        episodes: config.episodes,
        final_epsilon: result.final_epsilon,
        optimizer: OptimizerState::capture(&result.optimizer),
    };
    save_checkpoint(&out_dir.join("model.json"), &checkpoint)?;

    Ok(RunSummary {
        seed: config.seed,
        episodes: config.episodes,
        final_rolling_mean: result.log.last().map(|r| r.rolling_mean_100),
        out_dir: out_dir.to_path_buf(),
    })
}

/// The `train` command: load a config, train one seed (or a contiguous
/// block of seeds concurrently), and report one summary line per run.
pub fn cmd_train(
    config_path: &Path,
    output_dir: Option<&str>,
    parallel_seeds: Option<u32>,
) -> Result<String, LabError> {
    let mut config = config::load(config_path)?;
    if let Some(dir) = output_dir {
        config.output_dir = dir.to_string();
    }
    let base = config_path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let out_root = PathBuf::from(&config.output_dir);

    match parallel_seeds {
        None => {
            let summary = run_experiment(&config, &base, &out_root)?;
            Ok(format!("{}\n", summary.line()))
        }
        Some(0) => Err(LabError::Validation(String::from(
            "--parallel-seeds must be at least 1",
        ))),
        Some(k) => {
            let runs: Vec<(ExperimentConfig, PathBuf)> = (0..u64::from(k))
                .map(|i| {
                    let mut run_config = config.clone();
                    run_config.seed = config.seed + i;
                    let dir = out_root.join(format!("seed-{}", run_config.seed));
                    (run_config, dir)
                })
                .collect();
            let summaries = thread::scope(|scope| {
                let handles: Vec<_> = runs
                    .iter()
                    .map(|(run_config, dir)| {
                        let base = &base;
                        scope.spawn(move || run_experiment(run_config, base, dir))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training threads do not panic"))
                    .collect::<Result<Vec<_>, _>>()
            })?;
            let mut out = String::new();
            for summary in &summaries {
                out.push_str(&summary.line());
                out.push('\n');
            }
            Ok(out)
        }
    }
}

/// Construct the environment an `eval` argument names: `frozen-lake`,
/// `radio:N`, or a path to a map/pattern file.
pub fn parse_env_spec(spec: &str) -> Result<LabEnv, LabError> {
    if spec == "frozen-lake" {
        return Ok(LabEnv::Lake(FrozenLakeEnv::new(FrozenLakeMap::default_layout())));
    }
    if let Some(n) = spec.strip_prefix("radio:") {
        let n: usize = n.parse().map_err(|_| {
            LabError::Validation(format!("bad channel count in environment '{spec}'"))
        })?;
        let pattern = RadioPattern::ascending(n)
            .map_err(|e| LabError::Validation(format!("environment '{spec}': {e}")))?;
        return Ok(LabEnv::Radio(CognitiveRadioEnv::new(pattern)));
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| LabError::io("read", path, e))?;
    match vqrl_core::envs::load_env_config(&text) {
        Ok(EnvConfig::FrozenLake(map)) => Ok(LabEnv::Lake(FrozenLakeEnv::new(map))),
        Ok(EnvConfig::Radio(pattern)) => Ok(LabEnv::Radio(CognitiveRadioEnv::new(pattern))),
        Err(e) => Err(LabError::Validation(format!("environment file '{spec}': {e}"))),
    }
}

/// Reject model/environment pairs whose shapes cannot work together.
pub fn check_compat(model: &VqcModel, env: &impl Environment) -> Result<(), LabError> {
    let spec = model.spec();
    if env.n_actions() != spec.n_actions() {
        return Err(LabError::Validation(format!(
            "model outputs {} actions but the environment has {}",
            spec.n_actions(),
            env.n_actions()
        )));
    }
    if env.n_states() > spec.state_capacity() {
        return Err(LabError::Validation(format!(
            "environment has {} states but the model encodes at most {}",
            env.n_states(),
            spec.state_capacity()
        )));
    }
    Ok(())
}

/// Sampling options for the `eval` command.
#[derive(Debug, Clone)]
pub struct EvalBackendArgs {
    /// `analytic` or `shots`.
    pub backend: String,
    pub shots: u32,
    pub device: Option<String>,
    pub assignment: Option<Vec<usize>>,
}

impl Default for EvalBackendArgs {
    fn default() -> Self {
        EvalBackendArgs {
            backend: String::from("analytic"),
            shots: config::DEFAULT_SHOTS,
            device: None,
            assignment: None,
        }
    }
}

fn raw_backend(args: &EvalBackendArgs) -> Result<Option<RawBackend>, LabError> {
    match args.backend.as_str() {
        "analytic" => {
            if args.device.is_some() || args.assignment.is_some() {
                return Err(LabError::Validation(String::from(
                    "the analytic backend takes no device or assignment",
                )));
            }
            Ok(Some(RawBackend::Analytic))
        }
        "shots" => Ok(Some(RawBackend::Shots {
            shots: Some(args.shots),
            device: args.device.clone(),
            assignment: args.assignment.clone(),
        })),
        other => Err(LabError::Validation(format!(
            "unknown backend '{other}' (expected 'analytic' or 'shots')"
        ))),
    }
}

/// The `eval` command: greedy rollouts of a checkpointed model, one line
/// per episode plus the mean.
pub fn cmd_eval(
    checkpoint_path: &Path,
    env_spec: &str,
    backend_args: &EvalBackendArgs,
    episodes: u32,
    seed: u64,
) -> Result<String, LabError> {
    let checkpoint = crate::artifacts::load_checkpoint(checkpoint_path)?;
    let mut env = parse_env_spec(env_spec)?;
    check_compat(&checkpoint.model, &env)?;
    let raw = raw_backend(backend_args)?;
    let resolved =
        config::resolve_backend(raw.as_ref(), Path::new("."), checkpoint.model.spec().n_qubits)?;
    let backend = config::action_backend(&resolved, Path::new("."))?;

    let mut rows = Vec::with_capacity(episodes as usize);
    for i in 0..episodes {
        let (total_reward, steps) =
            greedy_episode(&checkpoint.model, &mut env, &backend, seed + u64::from(i))
                .map_err(|e| LabError::Runtime(format!("evaluation failed: {e}")))?;
        rows.push(EvalRow { episode: i + 1, steps, total_reward });
    }
    Ok(eval_table(&rows))
}

/// Trainable-parameter counts of the three agents on the n-channel radio
/// task: a tabular critic (`n^2` states by `n` actions), a dense
/// n -> n -> n network with biases, and the quantum circuit (two layers on
/// `n` qubits).
pub fn param_comparison_row(n: usize) -> Result<(usize, usize, usize), LabError> {
    let spec = CircuitSpec::for_problem(n * n, n, 2)
        .map_err(|e| LabError::Validation(format!("no circuit for {n} channels: {e}")))?;
    Ok((n * n * n, 2 * n * n + 2 * n, spec.param_count()))
}

/// The `compare-params` command: a CSV table of parameter counts over an
/// inclusive channel range such as `2..5`.
pub fn cmd_compare_params(range: &str) -> Result<String, LabError> {
    let (lo, hi) = match range.split_once("..") {
        Some((a, b)) => {
            let lo: usize = a.trim().parse().map_err(|_| bad_range(range))?;
            let hi: usize = b.trim().parse().map_err(|_| bad_range(range))?;
            (lo, hi)
        }
        None => {
            let n: usize = range.trim().parse().map_err(|_| bad_range(range))?;
            (n, n)
        }
    };
    if lo < 2 || hi > 5 || lo > hi {
        return Err(LabError::Validation(format!(
            "channel range {range} outside the supported 2..5"
        )));
    }
    let mut out = String::from("n,q_table,classical_net,vq_dqn\n");
    for n in lo..=hi {
        let (q_table, classical, quantum) = param_comparison_row(n)?;
        out.push_str(&format!("{n},{q_table},{classical},{quantum}\n"));
    }
    Ok(out)
}

fn bad_range(range: &str) -> LabError {
    LabError::Validation(format!("bad channel range '{range}' (expected e.g. 2..5)"))
}
