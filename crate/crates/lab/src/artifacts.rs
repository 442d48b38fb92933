//! Run artifacts: the per-episode score log (CSV), the model checkpoint
//! (JSON), and the evaluation table printed to stdout.
//!
//! Artifacts are plain text so runs can be diffed, and numbers are written
//! with Rust's shortest round-trip float formatting, so re-reading a file
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vqrl_core::rl::{EpisodeRecord, OptimizerConfig, RmsProp};
use vqrl_core::vqc::VqcModel;

use crate::LabError;

/// Column order of the score log.
pub const SCORES_HEADER: &str = "episode,total_reward,steps,rolling_mean_100,rolling_std_100,epsilon";

/// Render the training log as CSV. Episodes are numbered from 1.
pub fn scores_csv(log: &[EpisodeRecord]) -> String {
    let mut out = String::with_capacity(32 * (log.len() + 1));
    out.push_str(SCORES_HEADER);
    out.push('\n');
    for record in log {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            record.episode + 1,
            record.total_reward,
            record.steps,
            record.rolling_mean_100,
            record.rolling_std_100,
            record.epsilon
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Parse a score log back into records (inverse of [`scores_csv`]).
pub fn parse_scores_csv(text: &str) -> Result<Vec<EpisodeRecord>, LabError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == SCORES_HEADER => {}
        other => {
            return Err(LabError::Validation(format!(
                "score log header mismatch: expected '{SCORES_HEADER}', got {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(LabError::Validation(format!(
                "score log line {}: expected 6 fields, got {}",
                i + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            LabError::Validation(format!("score log line {}: bad {what}", i + 2))
        };
        let episode: u32 = fields[0].parse().map_err(|_| bad("episode"))?;
        if episode == 0 {
            return Err(bad("episode (numbering starts at 1)"));
        }
        records.push(EpisodeRecord {
            episode: episode - 1,
            total_reward: fields[1].parse().map_err(|_| bad("total_reward"))?,
            steps: fields[2].parse().map_err(|_| bad("steps"))?,
            rolling_mean_100: fields[3].parse().map_err(|_| bad("rolling_mean_100"))?,
            rolling_std_100: fields[4].parse().map_err(|_| bad("rolling_std_100"))?,
            epsilon: fields[5].parse().map_err(|_| bad("epsilon"))?,
        });
    }
    Ok(records)
}

/// Optimizer state in a serializable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub config: OptimizerConfig,
    pub square_avg: Vec<f64>,
    pub steps: u64,
}

impl OptimizerState {
    pub fn capture(optimizer: &RmsProp) -> Self {
        OptimizerState {
            config: *optimizer.config(),
            square_avg: optimizer.square_avg().to_vec(),
            steps: optimizer.steps(),
        }
    }

    pub fn restore(&self) -> RmsProp {
        RmsProp::from_state(self.config, self.square_avg.clone(), self.steps)
    }
}

/// Everything needed to evaluate or resume a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub model: VqcModel,
    pub seed: u64,
    pub episodes: u32,
    pub final_epsilon: f64,
    pub optimizer: OptimizerState,
}

/// Serialize a checkpoint (pretty JSON; floats round-trip exactly).
pub fn checkpoint_document(checkpoint: &Checkpoint) -> Result<String, LabError> {
    serde_json::to_string_pretty(checkpoint)
        .map_err(|e| LabError::Runtime(format!("serializing checkpoint: {e}")))
}

pub fn save_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<(), LabError> {
    let text = checkpoint_document(checkpoint)?;
    fs::write(path, text).map_err(|e| LabError::io("write", path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io("read", path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| LabError::Validation(format!("checkpoint {}: {e}", path.display())))
}

/// One greedy evaluation episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalRow {
    pub episode: u32,
    pub steps: u32,
    pub total_reward: f64,
}

/// Render evaluation results as the table the CLI prints: one row per
/// episode plus a mean-reward summary line.
pub fn eval_table(rows: &[EvalRow]) -> String {
    let mut out = String::from("episode,steps,total_reward\n");
    let mut sum = 0.0;
    for row in rows {
        writeln!(out, "{},{},{}", row.episode, row.steps, row.total_reward)
            .expect("writing to a String cannot fail");
        sum += row.total_reward;
    }
    if rows.is_empty() {
        out.push_str("mean_reward,NA\n");
    } else {
        writeln!(out, "mean_reward,{}", sum / rows.len() as f64)
            .expect("writing to a String cannot fail");
    }
    out
}
