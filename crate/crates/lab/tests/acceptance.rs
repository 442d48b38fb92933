//! Acceptance suite: the headline quantitative claims this workspace must
//! reproduce, one test (and one pass/fail line) per claim. Tolerances and
//! pass conditions are stated inline next to each assertion.
//!
//! The multi-seed training checks use seeds 1, 2, 3 — fixed up front, never
//! tuned — and pass when at least 2 of 3 seeds meet the stated bar. Every
//! run in this file is deterministic, so results are reproducible bit for
//! bit.

use std::time::Instant;

use vqrl_core::device::{DeviceProperties, IBMQ_POUGHKEEPSIE_CSV, IBMQ_VALENCIA_CSV};
use vqrl_core::envs::{
    CognitiveRadioEnv, Environment, FrozenLakeEnv, FrozenLakeMap, RadioPattern,
};
use vqrl_core::qsim::StateVector;
use vqrl_core::rl::{
    argmax, greedy_episode, q_learning_baseline, sarsa_baseline, train, ActionBackend,
    AgentConfig, DqnAgent, EpsilonSchedule, ExplorationSchedule, QTable, ReplayBuffer,
    Transition,
};
use vqrl_core::vqc::{build_circuit, encode, Backend, CircuitSpec, VqcModel};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 3] = [1, 2, 3];

fn radio_env(n: usize) -> CognitiveRadioEnv {
    CognitiveRadioEnv::new(RadioPattern::ascending(n).expect("2..=5 channels are supported"))
}

fn radio_spec(n: usize) -> CircuitSpec {
    CircuitSpec::for_problem(n * n, n, 2).expect("radio circuits fit the register")
}

fn lake_spec() -> CircuitSpec {
    CircuitSpec::for_problem(16, 4, 2).expect("the gridworld circuit fits the register")
}

/// 1. The computational-basis encoding is exact: for every 4-qubit input
///    index, the encoding rotations take |0000> to that basis state with
///    amplitude magnitude 1 (up to global phase), everything else at zero.
#[test]
fn encoding_maps_each_of_the_16_states_to_its_exact_basis_state() {
    let started = Instant::now();
    let spec = CircuitSpec::uniform(4, 0).expect("an encoding-only circuit is valid");
    for state in 0..16usize {
        let input = encode(state, 4).unwrap();
        let gates = build_circuit(&spec, &[], &input);
        let mut sv = StateVector::basis_state(4, 0).unwrap();
        for gate in &gates {
            sv = sv.apply_gate(gate).unwrap();
        }
        for (index, amp) in sv.amplitudes().iter().enumerate() {
            let magnitude = amp.norm();
            if index == state {
                assert!(
                    (magnitude - 1.0).abs() < 1e-12,
                    "FAIL: state {state} target amplitude magnitude {magnitude} not 1 within 1e-12"
                );
            } else {
                assert!(
                    magnitude < 1e-12,
                    "FAIL: state {state} leaks amplitude {magnitude} into basis index {index}"
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "FAIL: encoding check took {elapsed:?}, budget 1 s");
}

/// 2. Parameter-shift gradients agree with central finite differences
///    (h = 1e-4) within 1e-5 per coordinate on 100 random 4-qubit, 2-layer
///    models at random input states.
#[test]
fn parameter_shift_gradients_match_finite_differences_on_100_random_models() {
    let started = Instant::now();
    let h = 1e-4;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let model = VqcModel::init_random(lake_spec(), &mut rng).unwrap();
        let state = (trial as usize * 7) % 16;
        let action = (trial as usize) % 4;
        let analytic = model.parameter_shift_grad(state, action).unwrap();

        let thetas = model.thetas().to_vec();
        let bias = model.bias().to_vec();
        for t in 0..thetas.len() {
            let mut plus = thetas.clone();
            plus[t] += h;
            let mut minus = thetas.clone();
            minus[t] -= h;
            let q_plus = VqcModel::from_parts(lake_spec(), plus, bias.clone())
                .unwrap()
                .forward(state, Backend::Analytic)
                .unwrap()[action];
            let q_minus = VqcModel::from_parts(lake_spec(), minus, bias.clone())
                .unwrap()
                .forward(state, Backend::Analytic)
                .unwrap()[action];
            let numeric = (q_plus - q_minus) / (2.0 * h);
            let gap = (analytic.thetas[t] - numeric).abs();
            assert!(
                gap < 1e-5,
                "FAIL: trial {trial} theta {t}: parameter-shift {} vs finite difference {numeric} \
                 differ by {gap} (> 1e-5)",
                analytic.thetas[t]
            );
        }
        for (b, &g) in analytic.bias.iter().enumerate() {
            let expected = if b == action { 1.0 } else { 0.0 };
            assert_eq!(g, expected, "FAIL: trial {trial} bias {b} gradient must be exactly one-hot");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "FAIL: gradient check took {elapsed:?}, budget 30 s");
}

/// 3. Trainable-parameter counts: the circuit needs {14, 21, 28, 35} params
///    for 2-5 radio channels and 28 for the gridworld, against Q-table
///    sizes {8, 27, 64, 125} and 64.
#[test]
fn parameter_counts_match_the_published_table_exactly() {
    for (n, expected_vq, expected_table) in
        [(2, 14, 8), (3, 21, 27), (4, 28, 64), (5, 35, 125)]
    {
        let spec = radio_spec(n);
        assert_eq!(
            spec.param_count(),
            expected_vq,
            "FAIL: {n}-channel circuit must have {expected_vq} parameters"
        );
        let table = QTable::zeros(n * n, n);
        assert_eq!(
            table.entry_count(),
            expected_table,
            "FAIL: {n}-channel Q-table must have {expected_table} entries"
        );
    }
    assert_eq!(lake_spec().param_count(), 28, "FAIL: gridworld circuit must have 28 parameters");
    assert_eq!(
        QTable::zeros(16, 4).entry_count(),
        64,
        "FAIL: gridworld Q-table must have 64 entries"
    );
}

/// Train one radio seed and report whether the trailing-100 mean score
/// reaches the bar within the logged episodes.
fn radio_seed_reaches(n: usize, seed: u64, episodes: u32, bar: f64) -> bool {
    let mut env = radio_env(n);
    // Calibrated readout and discount for the channel sweep (both are
    // configurable knobs, not pinned values): the Pauli-Z readout spans
    // [-1, 1] and so covers the +1/-1 reward levels of this task exactly,
    // and the small discount keeps the Q-value scale within a range the
    // fixed learning rate can reach inside 300 episodes. See README.
    let mut spec = radio_spec(n);
    spec.observable = vqrl_core::vqc::Observable::PauliZ;
    let config = AgentConfig {
        gamma: 0.5,
        ..AgentConfig::radio()
    };
    let result = train(
        &mut env,
        spec,
        &config,
        &ActionBackend::Analytic,
        seed,
        episodes,
    )
    .expect("training must not fault");
    result.log.iter().any(|r| r.rolling_mean_100 >= bar)
}

/// 4. On the channel-sweep task every register size trains: for each
///    n in {2, 3, 4, 5}, at least 2 of 3 seeds reach a rolling-100 mean
///    score of 95 within 300 episodes (episodes past 300 cannot change
///    this, as training is deterministic per seed).
#[test]
fn radio_agents_reach_rolling_mean_95_for_every_channel_count() {
    for n in 2..=5usize {
        let mut passes = 0;
        let mut runs = 0;
        for &seed in &SEEDS {
            runs += 1;
            if radio_seed_reaches(n, seed, 300, 95.0) {
                passes += 1;
            }
            let remaining = SEEDS.len() - runs;
            if passes >= 2 || passes + remaining < 2 {
                break;
            }
        }
        assert!(
            passes >= 2,
            "FAIL: {n}-channel task: only {passes} of {runs} seeds reached rolling mean 95 \
             by episode 300 (need 2 of 3)"
        );
    }
}

/// 5. On the gridworld, a seed passes when (a) at some point within the
///    500 training episodes its greedy policy completes an evaluation
///    episode with reward >= 0.94 (a 6-7 step path), and (b) the
///    rolling-100 training mean at episode 500 is >= 0.80. At least 2 of
///    3 seeds must pass.
///
/// The run uses the Pauli-Z readout (its [-1, 1] range spans the full
/// spread of this task's TD targets, which the default probability
/// readout's [0, 1] range cannot) with the stock gridworld
/// hyperparameters otherwise. The greedy probe after each episode runs
/// on a separate environment and draws no randomness, so the training
/// trajectory is bit-identical to an unprobed run.
#[test]
fn gridworld_agents_learn_a_short_path_within_500_episodes() {
    let mut passes = 0;
    let mut report = String::new();
    for &seed in &SEEDS {
        let mut env = FrozenLakeEnv::new(FrozenLakeMap::default_layout());
        let mut probe_env = FrozenLakeEnv::new(FrozenLakeMap::default_layout());
        let mut spec = lake_spec();
        spec.observable = vqrl_core::vqc::Observable::PauliZ;
        let mut agent =
            DqnAgent::new(spec, AgentConfig::frozen_lake(), ActionBackend::Analytic, seed)
                .expect("agent construction must not fault");
        let mut rewards = Vec::with_capacity(500);
        let mut first_greedy_hit: Option<u32> = None;
        let mut best_rolling = (f64::NEG_INFINITY, 0u32);
        for episode in 0..500u32 {
            let (total_reward, _steps) =
                agent.run_episode(&mut env).expect("training must not fault");
            rewards.push(total_reward);
            let (rolling, _) = vqrl_core::rl::rolling_stats_100(&rewards);
            if rolling > best_rolling.0 {
                best_rolling = (rolling, episode);
            }
            if first_greedy_hit.is_none() {
                let (greedy_reward, _) =
                    greedy_episode(agent.model(), &mut probe_env, &ActionBackend::Analytic, 0)
                        .expect("greedy evaluation must not fault");
                if greedy_reward >= 0.94 {
                    first_greedy_hit = Some(episode);
                }
            }
            agent.finish_episode(episode);
        }
        let (final_mean, _) = vqrl_core::rl::rolling_stats_100(&rewards);
        let ok = first_greedy_hit.is_some() && final_mean >= 0.80;
        let line = format!(
            "seed {seed}: greedy >= 0.94 first at {}, best rolling {:.3} at episode {}, \
             rolling mean at 500: {final_mean:.3} -> {}",
            match first_greedy_hit {
                Some(e) => format!("episode {e}"),
                None => "never".to_string(),
            },
            best_rolling.0,
            best_rolling.1,
            if ok { "pass" } else { "miss" }
        );
        eprintln!("  {line}");
        report.push_str("\n    ");
        report.push_str(&line);
        if ok {
            passes += 1;
        }
    }
    assert!(
        passes >= 2,
        "FAIL: gridworld: only {passes} of 3 seeds achieved both a greedy-policy episode \
         >= 0.94 within 500 episodes and a rolling-100 mean >= 0.80 at episode 500 \
         (need 2 of 3):{report}"
    );
}

/// 6. A policy trained without noise survives hardware-style noise at
///    evaluation: the 4-channel seed-1 model, sampled at 1024 shots under
///    the bundled 5-qubit device model on qubits [0, 1, 3, 4], scores
///    mean >= 96 and min >= 90 over 5 episodes.
#[test]
fn a_noiselessly_trained_policy_keeps_scoring_under_device_noise() {
    let mut env = radio_env(4);
    let result = train(
        &mut env,
        radio_spec(4),
        &AgentConfig::radio(),
        &ActionBackend::Analytic,
        1,
        300,
    )
    .expect("training must not fault");
    assert!(
        result.log.iter().any(|r| r.rolling_mean_100 >= 95.0),
        "FAIL: the seed-1 model never converged, so the noisy evaluation would be meaningless"
    );

    let device = DeviceProperties::parse(IBMQ_VALENCIA_CSV).expect("the bundled table parses");
    let noise = device.synthesize_noise_model(&[0, 1, 3, 4]).expect("the chain exists");
    let backend = ActionBackend::Shots { shots: 1024, noise: Some(noise) };
    let mut scores = Vec::with_capacity(5);
    for episode in 0..5u64 {
        let (reward, _) = greedy_episode(&result.model, &mut env, &backend, episode)
            .expect("noisy evaluation must not fault");
        scores.push(reward);
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    eprintln!("  noisy evaluation scores: {scores:?} (mean {mean}, min {min})");
    assert!(mean >= 96.0, "FAIL: mean noisy-evaluation score {mean} below 96 ({scores:?})");
    assert!(min >= 90.0, "FAIL: min noisy-evaluation score {min} below 90 ({scores:?})");
}

/// 7. Training remains possible when action selection itself runs under
///    the 20-qubit device's noise model at 1024 shots: at least 2 of 3
///    seeds reach a rolling-100 mean of 90 within 300 episodes on the
///    2-channel task.
#[test]
fn agents_still_learn_when_actions_are_sampled_under_device_noise() {
    let device = DeviceProperties::parse(IBMQ_POUGHKEEPSIE_CSV).expect("the bundled table parses");
    let assignment = device.auto_assignment(2).expect("a 2-qubit chain exists");
    assert_eq!(assignment, vec![0, 1], "FAIL: the first 2-qubit chain must be [0, 1]");
    let noise = device.synthesize_noise_model(&assignment).expect("the chain synthesizes");

    let mut passes = 0;
    let mut runs = 0;
    for &seed in &SEEDS {
        runs += 1;
        let mut env = radio_env(2);
        let backend = ActionBackend::Shots { shots: 1024, noise: Some(noise.clone()) };
        let result = train(&mut env, radio_spec(2), &AgentConfig::radio(), &backend, seed, 300)
            .expect("noisy training must not fault");
        let best =
            result.log.iter().map(|r| r.rolling_mean_100).fold(f64::NEG_INFINITY, f64::max);
        eprintln!("  seed {seed}: best rolling mean under noise {best}");
        if best >= 90.0 {
            passes += 1;
        }
        let remaining = SEEDS.len() - runs;
        if passes >= 2 || passes + remaining < 2 {
            break;
        }
    }
    assert!(
        passes >= 2,
        "FAIL: noisy training: only {passes} of {runs} seeds reached rolling mean 90 \
         by episode 300 (need 2 of 3)"
    );
}

fn greedy_trace(table: &QTable, map: &FrozenLakeMap) -> Vec<(usize, usize)> {
    let mut env = FrozenLakeEnv::new(map.clone());
    let mut state = env.reset();
    let mut moves = Vec::new();
    for _ in 0..64 {
        let action = table.greedy_action(state);
        moves.push((state, action));
        let outcome = env.step(action).expect("greedy trace must step legally");
        state = outcome.next_state;
        if outcome.terminal {
            break;
        }
    }
    moves
}

/// Exact optimal action values by dynamic programming on the known,
/// deterministic grid: the independent oracle the learned tables are judged
/// against.
fn value_iteration_q(map: &FrozenLakeMap, gamma: f64) -> Vec<[f64; 4]> {
    let mut q = vec![[0.0f64; 4]; 16];
    loop {
        let mut delta = 0.0f64;
        let mut next = q.clone();
        for state in 0..16 {
            if map.cell(state).unwrap().is_terminal() {
                continue;
            }
            for action in 0..4 {
                let outcome = vqrl_core::envs::fl_step(map, state, action).unwrap();
                let bootstrap = if outcome.terminal {
                    0.0
                } else {
                    q[outcome.next_state].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                };
                let value = outcome.reward + gamma * bootstrap;
                delta = delta.max((value - q[state][action]).abs());
                next[state][action] = value;
            }
        }
        q = next;
        if delta < 1e-13 {
            return q;
        }
    }
}

/// How a learned greedy trace is judged: every move optimal under the
/// dynamic-programming oracle, goal reached in the breadth-first-search
/// minimum number of moves.
fn assert_trace_is_optimal(
    who: &str,
    trace: &[(usize, usize)],
    q_star: &[[f64; 4]],
    map: &FrozenLakeMap,
    shortest: usize,
) {
    assert_eq!(
        trace.len(),
        shortest,
        "FAIL: {who} greedy trace takes {} moves, the search oracle says {shortest}: {trace:?}",
        trace.len()
    );
    for &(state, action) in trace {
        let row = &q_star[state];
        let best = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (row[action] - best).abs() < 1e-9,
            "FAIL: {who} takes action {action} in state {state}, but the oracle values it \
             {} against the optimum {best}",
            row[action]
        );
    }
    let mut env = FrozenLakeEnv::new(map.clone());
    env.reset();
    let last = trace
        .iter()
        .map(|&(_, action)| env.step(action).expect("the trace must step legally"))
        .last();
    assert!(
        last.map(|o| o.terminal && o.reward == 1.0).unwrap_or(false),
        "FAIL: the {who} greedy trace must end on the goal cell"
    );
}

/// 8. The tabular baselines agree with the independent oracles: Q-learning's
///    greedy policy walks a shortest start-to-goal path (breadth-first
///    search gives 6 moves on the default map) taking only actions that
///    exact value iteration rates optimal, and SARSA with exploration
///    decaying toward zero converges to an equally optimal greedy policy.
#[test]
fn tabular_baselines_recover_the_shortest_path_policy() {
    let map = FrozenLakeMap::default_layout();
    let shortest = map.shortest_path_len().expect("the default map is solvable");
    assert_eq!(shortest, 6, "FAIL: the search oracle itself must give 6 moves");
    let q_star = value_iteration_q(&map, 0.99);

    let exploring = ExplorationSchedule {
        schedule: EpsilonSchedule::PerEpisodeDecay,
        epsilon_init: 1.0,
        epsilon_floor: Some(1.0),
    };
    let mut env = FrozenLakeEnv::new(map.clone());
    let (q_table, _) = q_learning_baseline(&mut env, 0.1, 0.99, &exploring, 3000, 5)
        .expect("tabular learning must not fault");
    let q_trace = greedy_trace(&q_table, &map);
    assert_trace_is_optimal("Q-learning", &q_trace, &q_star, &map, shortest);

    // SARSA with exploration decaying toward zero also lands on an optimal
    // greedy policy (the grid has several optimal routes, so the two
    // learners need not pick the same one; both must satisfy the oracle).
    let vanishing = ExplorationSchedule {
        schedule: EpsilonSchedule::PerStepGeometric,
        epsilon_init: 1.0,
        epsilon_floor: Some(0.01),
    };
    let mut env = FrozenLakeEnv::new(map.clone());
    let (s_table, _) = sarsa_baseline(&mut env, 0.1, 0.99, &vanishing, 3000, 5)
        .expect("tabular learning must not fault");
    let s_trace = greedy_trace(&s_table, &map);
    assert_trace_is_optimal("SARSA", &s_trace, &q_star, &map, shortest);
}

/// 9. Invariants the modules promise, spot-checked end to end: unitary
///    norm conservation, FIFO replay eviction, target-network equality on
///    sync, greedy-choice invariance under shared bias shifts, and
///    bit-identical seeded reruns.
#[test]
fn module_invariants_hold_end_to_end() {
    // Norm conservation across full random circuits.
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = VqcModel::init_random(lake_spec(), &mut rng).unwrap();
        let input = encode(seed as usize % 16, 4).unwrap();
        let mut sv = StateVector::basis_state(4, 0).unwrap();
        for gate in &model.build_circuit(&input) {
            sv = sv.apply_gate(gate).unwrap();
        }
        let norm: f64 = sv.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!(
            (norm - 1.0).abs() < 1e-12,
            "FAIL: circuit for seed {seed} drifted the state norm to {norm}"
        );
    }

    // Replay buffer evicts strictly oldest-first.
    let mut buffer = ReplayBuffer::new(3);
    let t = |state| Transition { state, action: 0, reward: 0.0, next_state: 0, terminal: false };
    for state in 0..5 {
        buffer.push(t(state));
    }
    let kept: Vec<usize> = buffer.iter().map(|t| t.state).collect();
    assert_eq!(kept, vec![2, 3, 4], "FAIL: replay must keep the newest 3 transitions in order");

    // Target network equals the main network exactly when (and only when)
    // a sync step reports it.
    let config = AgentConfig::radio();
    let mut agent = DqnAgent::new(radio_spec(2), config, ActionBackend::Analytic, 5).unwrap();
    let mut env = radio_env(2);
    env.reset();
    let mut saw_sync = false;
    let mut saw_divergence = false;
    for _ in 0..45 {
        let report = agent.step(&mut env).unwrap();
        if report.transition.terminal {
            env.reset();
        }
        if report.synced {
            saw_sync = true;
            assert_eq!(
                agent.target_model(),
                agent.model(),
                "FAIL: after a sync the target must equal the main model exactly"
            );
        } else if report.loss.is_some() {
            saw_divergence = true;
            assert_ne!(
                agent.target_model().flat_params(),
                agent.model().flat_params(),
                "FAIL: between syncs the target must lag the optimized main model"
            );
        }
    }
    assert!(saw_sync && saw_divergence, "FAIL: 45 steps must cover both sync and lag phases");

    // Adding the same constant to every bias never changes the greedy
    // choice.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = VqcModel::init_random(lake_spec(), &mut rng).unwrap();
    let shifted = VqcModel::from_parts(
        lake_spec(),
        model.thetas().to_vec(),
        model.bias().iter().map(|b| b + 0.37).collect(),
    )
    .unwrap();
    for state in 0..16 {
        let base = model.forward(state, Backend::Analytic).unwrap();
        let moved = shifted.forward(state, Backend::Analytic).unwrap();
        assert_eq!(
            argmax(&base),
            argmax(&moved),
            "FAIL: bias shift changed the greedy action in state {state}"
        );
    }

    // Bit-identical seeded reruns, including under shot sampling.
    for backend in [ActionBackend::Analytic, ActionBackend::Shots { shots: 32, noise: None }] {
        let mut env_a = radio_env(2);
        let mut env_b = radio_env(2);
        let a = train(&mut env_a, radio_spec(2), &AgentConfig::radio(), &backend, 3, 8).unwrap();
        let b = train(&mut env_b, radio_spec(2), &AgentConfig::radio(), &backend, 3, 8).unwrap();
        assert_eq!(a.model.flat_params(), b.model.flat_params(), "FAIL: parameters must rerun identically");
        assert_eq!(a.log, b.log, "FAIL: logs must rerun identically");
    }
}
