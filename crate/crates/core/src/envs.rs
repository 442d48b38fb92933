//! The two benchmark environments, as deterministic state machines.
//!
//! **Frozen lake**: a 4x4 grid of start/frozen/hole/goal cells. The agent
//! moves left/down/right/up (moves into a wall stay put), every non-terminal
//! move costs a small penalty, falling into a hole ends the episode with a
//! larger penalty, and reaching the goal pays +1. The variant here is
//! non-slippery: actions always move where they point.
//!
//! **Cognitive radio**: `n` channels, one of which is occupied by a primary
//! user sweeping a fixed periodic pattern. Each step the agent transmits on a
//! channel: colliding with the occupied channel scores -1, a free channel
//! scores +1. Three collisions end the episode early; otherwise it ends at
//! step 100, so a perfect run scores exactly 100.
//!
//! Both expose their discrete state as a single index (row-major grid cell;
//! `occupied * n + time mod n`) so the same agents drive either one through
//! the [`Environment`] trait.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Errors from parsing environment configuration or stepping an episode.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("map must have 4 rows of 4 cells; row {row} has {got} cells")]
    MapRowLength { row: usize, got: usize },
    #[error("map must have 4 rows, got {0}")]
    MapRowCount(usize),
    #[error("map row {row}, column {col}: invalid cell '{cell}' (expected S, F, H, or G)")]
    MapCell { row: usize, col: usize, cell: char },
    #[error("map must contain exactly one start cell, found {0}")]
    MapStartCount(usize),
    #[error("map must contain exactly one goal cell, found {0}")]
    MapGoalCount(usize),
    #[error("goal cannot be reached from the start without crossing a hole")]
    GoalUnreachable,
    #[error("channel count {0} outside supported range 2..=5")]
    ChannelCountOutOfRange(usize),
    #[error("occupancy sequence must list one channel per time step ({expected}), got {got}")]
    OccupancyLength { expected: usize, got: usize },
    #[error("occupancy entry {position} is channel {channel}, but only {n_channels} channels exist")]
    OccupancyChannel { position: usize, channel: usize, n_channels: usize },
    #[error("state {state} out of range for {n_states} states")]
    StateOutOfRange { state: usize, n_states: usize },
    #[error("action {action} out of range for {n_actions} actions")]
    ActionOutOfRange { action: usize, n_actions: usize },
    #[error("cannot step from a terminal state")]
    EpisodeFinished,
    #[error("environment config is not a radio pattern: {0}")]
    PatternSyntax(String),
}

/// Reward structure of the frozen lake (see module docs).
pub const FL_STEP_REWARD: f64 = -0.01;
pub const FL_HOLE_REWARD: f64 = -0.2;
pub const FL_GOAL_REWARD: f64 = 1.0;

/// One cell of the frozen-lake grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Start,
    Frozen,
    Hole,
    Goal,
}

impl Cell {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'S' => Some(Cell::Start),
            'F' => Some(Cell::Frozen),
            'H' => Some(Cell::Hole),
            'G' => Some(Cell::Goal),
            _ => None,
        }
    }

    /// Holes and the goal end the episode.
    pub fn is_terminal(self) -> bool {
        matches!(self, Cell::Hole | Cell::Goal)
    }
}

/// The four frozen-lake moves, in their numeric action order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlAction {
    Left = 0,
    Down = 1,
    Right = 2,
    Up = 3,
}

impl FlAction {
    pub fn from_index(action: usize) -> Option<Self> {
        match action {
            0 => Some(FlAction::Left),
            1 => Some(FlAction::Down),
            2 => Some(FlAction::Right),
            3 => Some(FlAction::Up),
            _ => None,
        }
    }
}

/// A validated 4x4 frozen-lake grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrozenLakeMap {
    grid: [[Cell; 4]; 4],
    /// Whether moves can slip sideways. Always false in this artifact; the
    /// field documents the variant rather than enabling it.
    pub slippery: bool,
}

impl FrozenLakeMap {
    /// The standard 4x4 layout used by the default experiments.
    pub fn default_layout() -> Self {
        Self::parse("SFFF\nFHFH\nFFFH\nHFFG").expect("default layout is valid")
    }

    /// Parse a grid from text: four rows of `S`/`F`/`H`/`G`, one per line
    /// (a single `/`-separated line is also accepted). Validates that there
    /// is exactly one start and one goal and that the goal is reachable.
    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let trimmed = text.trim();
        let rows: Vec<&str> = if trimmed.lines().count() == 1 && trimmed.contains('/') {
            trimmed.split('/').collect()
        } else {
            trimmed.lines().map(str::trim).collect()
        };
        if rows.len() != 4 {
            return Err(EnvError::MapRowCount(rows.len()));
        }
        let mut grid = [[Cell::Frozen; 4]; 4];
        for (r, row) in rows.iter().enumerate() {
            let cells: Vec<char> = row.chars().collect();
            if cells.len() != 4 {
                return Err(EnvError::MapRowLength { row: r, got: cells.len() });
            }
            for (c, &cell) in cells.iter().enumerate() {
                grid[r][c] =
                    Cell::from_char(cell).ok_or(EnvError::MapCell { row: r, col: c, cell })?;
            }
        }
        let map = FrozenLakeMap { grid, slippery: false };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<(), EnvError> {
        let count = |kind: Cell| {
            self.grid.iter().flatten().filter(|&&c| c == kind).count()
        };
        let starts = count(Cell::Start);
        if starts != 1 {
            return Err(EnvError::MapStartCount(starts));
        }
        let goals = count(Cell::Goal);
        if goals != 1 {
            return Err(EnvError::MapGoalCount(goals));
        }
        if self.shortest_path_len().is_none() {
            return Err(EnvError::GoalUnreachable);
        }
        Ok(())
    }

    /// Cell at a state index (row-major).
    pub fn cell(&self, state: usize) -> Result<Cell, EnvError> {
        if state >= 16 {
            return Err(EnvError::StateOutOfRange { state, n_states: 16 });
        }
        Ok(self.grid[state / 4][state % 4])
    }

    /// State index of the start cell.
    pub fn start_state(&self) -> usize {
        self.position_of(Cell::Start)
    }

    /// State index of the goal cell.
    pub fn goal_state(&self) -> usize {
        self.position_of(Cell::Goal)
    }

    fn position_of(&self, kind: Cell) -> usize {
        self.grid
            .iter()
            .flatten()
            .position(|&c| c == kind)
            .expect("validated maps have the cell")
    }

    /// Minimum number of moves from start to goal that never enters a hole,
    /// or `None` if no such path exists (breadth-first search).
    pub fn shortest_path_len(&self) -> Option<usize> {
        let start = self
            .grid
            .iter()
            .flatten()
            .position(|&c| c == Cell::Start)?;
        let mut dist = [usize::MAX; 16];
        let mut queue: Vec<usize> = Vec::with_capacity(16);
        dist[start] = 0;
        queue.push(start);
        let mut head = 0;
        while head < queue.len() {
            let here = queue[head];
            head += 1;
            if self.grid[here / 4][here % 4] == Cell::Goal {
                return Some(dist[here]);
            }
            for action in 0..4 {
                let next = moved_state(here, FlAction::from_index(action).unwrap());
                if self.grid[next / 4][next % 4] != Cell::Hole && dist[next] == usize::MAX {
                    dist[next] = dist[here] + 1;
                    queue.push(next);
                }
            }
        }
        None
    }
}

/// Target cell of a move, clamped at the grid edges.
fn moved_state(state: usize, action: FlAction) -> usize {
    let (row, col) = (state / 4, state % 4);
    let (row, col) = match action {
        FlAction::Left => (row, col.saturating_sub(1)),
        FlAction::Down => ((row + 1).min(3), col),
        FlAction::Right => (row, (col + 1).min(3)),
        FlAction::Up => (row.saturating_sub(1), col),
    };
    row * 4 + col
}

/// Initial state of a frozen-lake episode.
pub fn fl_reset(map: &FrozenLakeMap) -> usize {
    map.start_state()
}

/// Outcome of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvOutcome {
    pub next_state: usize,
    pub reward: f64,
    pub terminal: bool,
}

/// One frozen-lake move as a pure function of the map.
///
/// The reward depends on the cell the move lands on: a hole or the goal end
/// the episode with their own rewards, anything else costs the step penalty.
pub fn fl_step(map: &FrozenLakeMap, state: usize, action: usize) -> Result<EnvOutcome, EnvError> {
    let cell = map.cell(state)?;
    if cell.is_terminal() {
        return Err(EnvError::EpisodeFinished);
    }
    let action =
        FlAction::from_index(action).ok_or(EnvError::ActionOutOfRange { action, n_actions: 4 })?;
    let next_state = moved_state(state, action);
    let (reward, terminal) = match map.cell(next_state)? {
        Cell::Hole => (FL_HOLE_REWARD, true),
        Cell::Goal => (FL_GOAL_REWARD, true),
        Cell::Start | Cell::Frozen => (FL_STEP_REWARD, false),
    };
    Ok(EnvOutcome { next_state, reward, terminal })
}

/// Reward structure and episode limits of the radio task.
pub const CR_SUCCESS_REWARD: f64 = 1.0;
pub const CR_COLLISION_REWARD: f64 = -1.0;
pub const CR_MAX_COLLISIONS: usize = 3;
pub const CR_STEP_CAP: usize = 100;

/// The primary user's periodic channel occupancy.
///
/// `occupancy[t mod n]` is the channel occupied at time `t`; the sequence has
/// one entry per time step of the cycle, so the pattern repeats with period
/// `n_channels`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioPattern {
    pub n_channels: usize,
    pub occupancy: Vec<usize>,
    /// Which shipped configuration this is (a, b, or c), if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl RadioPattern {
    /// Construct and validate a pattern.
    pub fn new(n_channels: usize, occupancy: Vec<usize>) -> Result<Self, EnvError> {
        let pattern = RadioPattern { n_channels, occupancy, label: None };
        pattern.validate()?;
        Ok(pattern)
    }

    /// Configuration (a): the primary user sweeps channels in ascending
    /// order, one per time step.
    pub fn ascending(n_channels: usize) -> Result<Self, EnvError> {
        Self::new(n_channels, (0..n_channels).collect())
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if !(2..=5).contains(&self.n_channels) {
            return Err(EnvError::ChannelCountOutOfRange(self.n_channels));
        }
        if self.occupancy.len() != self.n_channels {
            return Err(EnvError::OccupancyLength {
                expected: self.n_channels,
                got: self.occupancy.len(),
            });
        }
        for (position, &channel) in self.occupancy.iter().enumerate() {
            if channel >= self.n_channels {
                return Err(EnvError::OccupancyChannel {
                    position,
                    channel,
                    n_channels: self.n_channels,
                });
            }
        }
        Ok(())
    }

    /// Channel occupied at time `t`.
    pub fn occupied_at(&self, time: usize) -> usize {
        self.occupancy[time % self.n_channels]
    }
}

/// Combined state index of (occupied channel, time within the cycle).
pub fn cr_state_index(occupied_channel: usize, time: usize, n_channels: usize) -> usize {
    occupied_channel * n_channels + time % n_channels
}

/// One radio step as a pure function: the collision is judged against the
/// channel occupied at the *current* time, and the successor state is the
/// pattern's situation at `time + 1`.
pub fn cr_step(
    pattern: &RadioPattern,
    time: usize,
    chosen_channel: usize,
) -> Result<(f64, bool, usize), EnvError> {
    if chosen_channel >= pattern.n_channels {
        return Err(EnvError::ActionOutOfRange {
            action: chosen_channel,
            n_actions: pattern.n_channels,
        });
    }
    let collision = chosen_channel == pattern.occupied_at(time);
    let reward = if collision { CR_COLLISION_REWARD } else { CR_SUCCESS_REWARD };
    let next_state = cr_state_index(pattern.occupied_at(time + 1), time + 1, pattern.n_channels);
    Ok((reward, collision, next_state))
}

/// A parsed environment configuration file.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvConfig {
    FrozenLake(FrozenLakeMap),
    Radio(RadioPattern),
}

/// Parse an environment description: JSON objects are radio patterns
/// (`n_channels` + `occupancy`), anything else is read as a frozen-lake map.
pub fn load_env_config(text: &str) -> Result<EnvConfig, EnvError> {
    if text.trim_start().starts_with('{') {
        let pattern: RadioPattern = serde_json::from_str(text)
            .map_err(|e| EnvError::PatternSyntax(alloc::format!("{e}")))?;
        pattern.validate()?;
        Ok(EnvConfig::Radio(pattern))
    } else {
        Ok(EnvConfig::FrozenLake(FrozenLakeMap::parse(text)?))
    }
}

/// A discrete, episodic, deterministic environment driven by integer states
/// and actions. Implementations own their episode state: `reset` starts a
/// new episode and returns its first state, `step` advances it.
pub trait Environment {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// State the next action will be taken from.
    fn state(&self) -> usize;
    fn reset(&mut self) -> usize;
    fn step(&mut self, action: usize) -> Result<EnvOutcome, EnvError>;
}

/// Stateful frozen-lake episode with an optional step cap. Hitting the cap
/// ends the episode (reported as terminal) to bound runaway policies.
#[derive(Debug, Clone)]
pub struct FrozenLakeEnv {
    map: FrozenLakeMap,
    state: usize,
    steps: usize,
    done: bool,
    step_cap: Option<usize>,
}

impl FrozenLakeEnv {
    pub const DEFAULT_STEP_CAP: usize = 200;

    pub fn new(map: FrozenLakeMap) -> Self {
        Self::with_step_cap(map, Some(Self::DEFAULT_STEP_CAP))
    }

    pub fn with_step_cap(map: FrozenLakeMap, step_cap: Option<usize>) -> Self {
        let state = fl_reset(&map);
        FrozenLakeEnv { map, state, steps: 0, done: false, step_cap }
    }

    pub fn map(&self) -> &FrozenLakeMap {
        &self.map
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }
}

impl Environment for FrozenLakeEnv {
    fn n_states(&self) -> usize {
        16
    }

    fn n_actions(&self) -> usize {
        4
    }

    fn state(&self) -> usize {
        self.state
    }

    fn reset(&mut self) -> usize {
        self.state = fl_reset(&self.map);
        self.steps = 0;
        self.done = false;
        self.state
    }

    fn step(&mut self, action: usize) -> Result<EnvOutcome, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let mut outcome = fl_step(&self.map, self.state, action)?;
        self.steps += 1;
        if let Some(cap) = self.step_cap {
            if self.steps >= cap {
                outcome.terminal = true;
            }
        }
        self.state = outcome.next_state;
        self.done = outcome.terminal;
        Ok(outcome)
    }
}

/// Stateful cognitive-radio episode.
#[derive(Debug, Clone)]
pub struct CognitiveRadioEnv {
    pattern: RadioPattern,
    time: usize,
    collisions: usize,
    done: bool,
}

impl CognitiveRadioEnv {
    pub fn new(pattern: RadioPattern) -> Self {
        CognitiveRadioEnv { pattern, time: 0, collisions: 0, done: false }
    }

    pub fn pattern(&self) -> &RadioPattern {
        &self.pattern
    }

    pub fn steps_taken(&self) -> usize {
        self.time
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }
}

impl Environment for CognitiveRadioEnv {
    fn n_states(&self) -> usize {
        self.pattern.n_channels * self.pattern.n_channels
    }

    fn n_actions(&self) -> usize {
        self.pattern.n_channels
    }

    fn state(&self) -> usize {
        cr_state_index(self.pattern.occupied_at(self.time), self.time, self.pattern.n_channels)
    }

    fn reset(&mut self) -> usize {
        self.time = 0;
        self.collisions = 0;
        self.done = false;
        self.state()
    }

    fn step(&mut self, action: usize) -> Result<EnvOutcome, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        let (reward, collision, next_state) = cr_step(&self.pattern, self.time, action)?;
        self.time += 1;
        if collision {
            self.collisions += 1;
        }
        let terminal = self.collisions >= CR_MAX_COLLISIONS || self.time >= CR_STEP_CAP;
        self.done = terminal;
        Ok(EnvOutcome { next_state, reward, terminal })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout_places_cells_as_documented() {
        let map = FrozenLakeMap::default_layout();
        assert_eq!(map.start_state(), 0);
        assert_eq!(map.goal_state(), 15);
        for hole in [5, 7, 11, 12] {
            assert_eq!(map.cell(hole).unwrap(), Cell::Hole, "state {hole}");
        }
        assert!(!map.slippery);
    }

    #[test]
    fn default_layout_shortest_path_is_six_moves() {
        // Hand-checked: down, down, right, right, down, right avoids all
        // four holes and reaches the goal in 6 moves; no 5-move path exists
        // because the Manhattan distance from corner to corner is 6.
        assert_eq!(FrozenLakeMap::default_layout().shortest_path_len(), Some(6));
    }

    #[test]
    fn parse_accepts_slash_separated_rows() {
        let map = FrozenLakeMap::parse("SFFF/FHFH/FFFH/HFFG").unwrap();
        assert_eq!(map, FrozenLakeMap::default_layout());
    }

    #[test]
    fn reset_returns_the_start_cell_wherever_it_is() {
        assert_eq!(fl_reset(&FrozenLakeMap::default_layout()), 0);
        let shifted = FrozenLakeMap::parse("FFFF\nFFSF\nFFFF\nGFFF").unwrap();
        assert_eq!(fl_reset(&shifted), 6);
    }

    #[test]
    fn moves_into_walls_stay_put_and_cost_a_step() {
        let map = FrozenLakeMap::default_layout();
        for action in [FlAction::Left as usize, FlAction::Up as usize] {
            let out = fl_step(&map, 0, action).unwrap();
            assert_eq!(
                out,
                EnvOutcome { next_state: 0, reward: FL_STEP_REWARD, terminal: false }
            );
        }
    }

    #[test]
    fn goal_pays_one_without_step_penalty() {
        let map = FrozenLakeMap::default_layout();
        let out = fl_step(&map, 14, FlAction::Right as usize).unwrap();
        assert_eq!(out, EnvOutcome { next_state: 15, reward: FL_GOAL_REWARD, terminal: true });
    }

    #[test]
    fn holes_terminate_with_their_own_penalty() {
        let map = FrozenLakeMap::default_layout();
        let out = fl_step(&map, 4, FlAction::Right as usize).unwrap();
        assert_eq!(out, EnvOutcome { next_state: 5, reward: FL_HOLE_REWARD, terminal: true });
    }

    #[test]
    fn stepping_from_terminal_cells_is_an_error() {
        let map = FrozenLakeMap::default_layout();
        assert_eq!(fl_step(&map, 5, 0), Err(EnvError::EpisodeFinished));
        assert_eq!(fl_step(&map, 15, 0), Err(EnvError::EpisodeFinished));
    }

    #[test]
    fn every_frozen_lake_reward_is_one_of_the_three_documented_values() {
        let map = FrozenLakeMap::default_layout();
        for state in 0..16 {
            if map.cell(state).unwrap().is_terminal() {
                continue;
            }
            for action in 0..4 {
                let out = fl_step(&map, state, action).unwrap();
                assert!(
                    [FL_STEP_REWARD, FL_HOLE_REWARD, FL_GOAL_REWARD].contains(&out.reward),
                    "state {state} action {action} gave reward {}",
                    out.reward
                );
            }
        }
    }

    #[test]
    fn malformed_maps_name_the_offending_cell() {
        assert_eq!(
            FrozenLakeMap::parse("SFFF\nFHFH\nFFFH"),
            Err(EnvError::MapRowCount(3))
        );
        assert_eq!(
            FrozenLakeMap::parse("SFFF\nFHFHF\nFFFH\nHFFG"),
            Err(EnvError::MapRowLength { row: 1, got: 5 })
        );
        assert_eq!(
            FrozenLakeMap::parse("SFFF\nFXFH\nFFFH\nHFFG"),
            Err(EnvError::MapCell { row: 1, col: 1, cell: 'X' })
        );
        assert_eq!(
            FrozenLakeMap::parse("FFFF\nFHFH\nFFFH\nHFFG"),
            Err(EnvError::MapStartCount(0))
        );
        assert_eq!(
            FrozenLakeMap::parse("SFFF\nFHFH\nFFFH\nHFFF"),
            Err(EnvError::MapGoalCount(0))
        );
    }

    #[test]
    fn goals_walled_off_by_holes_are_rejected() {
        // Goal at (3,3) with holes at (2,3) and (3,2): unreachable.
        assert_eq!(
            FrozenLakeMap::parse("SFFF\nFFFF\nFFHH\nFFHG"),
            Err(EnvError::GoalUnreachable)
        );
    }

    #[test]
    fn state_index_combines_channel_and_cycle_position() {
        assert_eq!(cr_state_index(2, 5, 4), 9);
        assert_eq!(cr_state_index(0, 0, 3), 0);
        for occupied in 0..3 {
            for time in 0..30 {
                assert!(cr_state_index(occupied, time, 3) < 9);
            }
        }
    }

    #[test]
    fn ascending_pattern_sweeps_in_order_and_repeats() {
        let pattern = RadioPattern::ascending(4).unwrap();
        assert_eq!(pattern.occupancy, vec![0, 1, 2, 3]);
        for time in 0..200 {
            assert_eq!(pattern.occupied_at(time), pattern.occupied_at(time + 4));
            assert_eq!(pattern.occupied_at(time), time % 4);
        }
    }

    #[test]
    fn invalid_patterns_name_the_offending_entry() {
        assert_eq!(
            RadioPattern::new(6, vec![0, 1, 2, 3, 4, 5]),
            Err(EnvError::ChannelCountOutOfRange(6))
        );
        assert_eq!(
            RadioPattern::new(4, vec![0, 1, 2]),
            Err(EnvError::OccupancyLength { expected: 4, got: 3 })
        );
        assert_eq!(
            RadioPattern::new(4, vec![0, 1, 2, 4]),
            Err(EnvError::OccupancyChannel { position: 3, channel: 4, n_channels: 4 })
        );
    }

    #[test]
    fn perfect_radio_policy_scores_the_maximum() {
        let mut env = CognitiveRadioEnv::new(RadioPattern::ascending(4).unwrap());
        env.reset();
        let mut total = 0.0;
        let mut steps = 0;
        loop {
            let occupied = env.pattern().occupied_at(env.steps_taken());
            let free = (occupied + 1) % 4;
            let out = env.step(free).unwrap();
            total += out.reward;
            steps += 1;
            if out.terminal {
                break;
            }
        }
        assert_eq!(steps, 100);
        assert_eq!(total, 100.0);
    }

    #[test]
    fn three_collisions_terminate_immediately() {
        let mut env = CognitiveRadioEnv::new(RadioPattern::ascending(4).unwrap());
        env.reset();
        let mut total = 0.0;
        for step in 0..3 {
            let occupied = env.pattern().occupied_at(env.steps_taken());
            let out = env.step(occupied).unwrap();
            total += out.reward;
            assert_eq!(out.terminal, step == 2);
        }
        assert_eq!(total, -3.0);
        assert_eq!(env.step(0), Err(EnvError::EpisodeFinished));
    }

    #[test]
    fn one_collision_in_an_otherwise_perfect_run_scores_98() {
        let mut env = CognitiveRadioEnv::new(RadioPattern::ascending(4).unwrap());
        env.reset();
        let mut total = 0.0;
        for step in 0..100 {
            let occupied = env.pattern().occupied_at(env.steps_taken());
            let choice = if step == 50 { occupied } else { (occupied + 1) % 4 };
            total += env.step(choice).unwrap().reward;
        }
        assert_eq!(total, 98.0);
    }

    #[test]
    fn radio_state_tracks_the_pattern() {
        let pattern = RadioPattern::new(4, vec![0, 2, 1, 3]).unwrap();
        let mut env = CognitiveRadioEnv::new(pattern);
        assert_eq!(env.reset(), cr_state_index(0, 0, 4));
        let out = env.step(1).unwrap();
        assert_eq!(out.next_state, cr_state_index(2, 1, 4));
        assert_eq!(env.state(), out.next_state);
    }

    #[test]
    fn frozen_lake_env_enforces_the_step_cap() {
        let map = FrozenLakeMap::default_layout();
        let mut env = FrozenLakeEnv::with_step_cap(map, Some(5));
        env.reset();
        // Bounce off the left wall forever; the cap must end the episode.
        for step in 0..5 {
            let out = env.step(FlAction::Left as usize).unwrap();
            assert_eq!(out.terminal, step == 4, "step {step}");
        }
        assert_eq!(env.step(0), Err(EnvError::EpisodeFinished));
    }

    #[test]
    fn env_config_loader_dispatches_on_shape() {
        let map_text = "SFFF\nFHFH\nFFFH\nHFFG";
        match load_env_config(map_text).unwrap() {
            EnvConfig::FrozenLake(map) => assert_eq!(map, FrozenLakeMap::default_layout()),
            other => panic!("expected a map, got {other:?}"),
        }

        let pattern_text = r#"{"n_channels": 4, "occupancy": [0, 1, 2, 3], "label": "a"}"#;
        match load_env_config(pattern_text).unwrap() {
            EnvConfig::Radio(pattern) => {
                assert_eq!(pattern.occupancy, vec![0, 1, 2, 3]);
                assert_eq!(pattern.label.as_deref(), Some("a"));
            }
            other => panic!("expected a pattern, got {other:?}"),
        }

        // Invalid entries surface the validation error, not a parse error.
        let bad = r#"{"n_channels": 4, "occupancy": [0, 1, 2, 7]}"#;
        assert_eq!(
            load_env_config(bad),
            Err(EnvError::OccupancyChannel { position: 3, channel: 7, n_channels: 4 })
        );
    }

    #[test]
    fn identical_state_action_pairs_always_yield_identical_outcomes() {
        let map = FrozenLakeMap::default_layout();
        for state in 0..16 {
            if map.cell(state).unwrap().is_terminal() {
                continue;
            }
            for action in 0..4 {
                assert_eq!(fl_step(&map, state, action), fl_step(&map, state, action));
            }
        }
        let pattern = RadioPattern::ascending(5).unwrap();
        for time in 0..10 {
            for chosen in 0..5 {
                assert_eq!(cr_step(&pattern, time, chosen), cr_step(&pattern, time, chosen));
            }
        }
    }
}
