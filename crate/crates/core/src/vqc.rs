//! The variational quantum circuit used as a Q-function approximator.
//!
//! A discrete state is loaded by computational basis encoding: state index
//! `s` is written in binary as `b_1 .. b_n` (qubit 1 holds the most
//! significant bit) and each qubit `i` receives `Rx(pi * b_i)` followed by
//! `Rz(pi * b_i)`, preparing the basis state `|b_1 .. b_n>` up to phase.
//!
//! The trainable part repeats, per layer, a CNOT chain
//! `(1,2), (2,3), .., (n-1, n)` followed by one composed rotation
//! `U3(alpha, beta, gamma)` on every parameterized qubit. The Q-value of
//! action `a` is the probability that measured qubit `a` reads 1 (or,
//! optionally, its Pauli-Z expectation) plus a trainable additive bias, which
//! lets outputs leave `[0, 1]` without extra circuit depth.
//!
//! Gradients use the exact two-point parameter-shift rule on the analytic
//! backend: each rotation angle is shifted by `+pi/2` and `-pi/2` and the
//! difference of the two evaluations is halved. The bias enters linearly, so
//! its gradient is an indicator.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::qsim::{Gate, NoiseModel, QsimError, StateVector, MAX_QUBITS};

/// Errors from circuit construction, evaluation, or differentiation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VqcError {
    #[error("state index {state} cannot be encoded on {n_qubits} qubits (capacity {capacity})")]
    StateOutOfRange { state: usize, n_qubits: usize, capacity: usize },
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    QubitCountOutOfRange(usize),
    #[error("{role} qubit list must be non-empty, strictly increasing, and within 1..={n_qubits}")]
    BadQubitList { role: &'static str, n_qubits: usize },
    #[error("expected {expected} rotation angles, got {got}")]
    ThetaCountMismatch { expected: usize, got: usize },
    #[error("expected {expected} bias entries, got {got}")]
    BiasCountMismatch { expected: usize, got: usize },
    #[error("action {action} out of range for {n_actions} measured qubits")]
    ActionOutOfRange { action: usize, n_actions: usize },
    #[error("simulation failed: {0}")]
    Simulation(#[from] QsimError),
}

/// Which scalar is read from each measured qubit before the bias is added.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Probability of measuring 1 (the default readout).
    #[default]
    ProbOne,
    /// Pauli-Z expectation, `1 - 2 P(1)`.
    PauliZ,
}

/// Shape of the ansatz: register size, layer count, which qubits carry
/// trainable rotations, and which are measured for Q-values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Qubits carrying a `U3` per layer; strictly increasing, 1-based.
    pub parameterized_qubits: Vec<usize>,
    /// Qubits measured for Q-values, one action each; strictly increasing.
    pub measured_qubits: Vec<usize>,
    /// Readout observable (probability of 1 unless configured otherwise).
    #[serde(default)]
    pub observable: Observable,
}

impl CircuitSpec {
    /// Every qubit parameterized and measured.
    pub fn uniform(n_qubits: usize, n_layers: usize) -> Result<Self, VqcError> {
        Self::with_actions(n_qubits, n_layers, n_qubits)
    }

    /// The first `n_actions` qubits parameterized and measured. Covers the
    /// case of a state space needing more qubits than there are actions
    /// (e.g. 9 states on 4 qubits with 3 actions).
    pub fn with_actions(
        n_qubits: usize,
        n_layers: usize,
        n_actions: usize,
    ) -> Result<Self, VqcError> {
        let spec = CircuitSpec {
            n_qubits,
            n_layers,
            parameterized_qubits: (1..=n_actions).collect(),
            measured_qubits: (1..=n_actions).collect(),
            observable: Observable::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The smallest spec for a problem with the given state and action
    /// counts: enough qubits to hold every state index in binary, one
    /// measured qubit per action.
    pub fn for_problem(
        n_states: usize,
        n_actions: usize,
        n_layers: usize,
    ) -> Result<Self, VqcError> {
        let mut n_qubits = 1;
        while (1usize << n_qubits) < n_states {
            n_qubits += 1;
            if n_qubits > MAX_QUBITS {
                return Err(VqcError::QubitCountOutOfRange(n_qubits));
            }
        }
        Self::with_actions(n_qubits.max(n_actions), n_layers, n_actions)
    }

    /// Check all structural invariants.
    pub fn validate(&self) -> Result<(), VqcError> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(VqcError::QubitCountOutOfRange(self.n_qubits));
        }
        for (role, list) in [
            ("parameterized", &self.parameterized_qubits),
            ("measured", &self.measured_qubits),
        ] {
            let increasing = list.windows(2).all(|w| w[0] < w[1]);
            let in_range = list.iter().all(|&q| (1..=self.n_qubits).contains(&q));
            if list.is_empty() || !increasing || !in_range {
                return Err(VqcError::BadQubitList { role, n_qubits: self.n_qubits });
            }
        }
        Ok(())
    }

    /// Number of trainable rotation angles: three per parameterized qubit
    /// per layer.
    pub fn theta_count(&self) -> usize {
        self.parameterized_qubits.len() * 3 * self.n_layers
    }

    /// Total trainable parameters: rotation angles plus one bias per
    /// measured qubit.
    pub fn param_count(&self) -> usize {
        self.theta_count() + self.measured_qubits.len()
    }

    /// One action per measured qubit.
    pub fn n_actions(&self) -> usize {
        self.measured_qubits.len()
    }

    /// Largest encodable state index plus one.
    pub fn state_capacity(&self) -> usize {
        1usize << self.n_qubits
    }

    /// Flat index of the angle `(layer, position-in-parameterized-list,
    /// component)`; layer-major, then qubit, then `(alpha, beta, gamma)`.
    pub fn theta_index(&self, layer: usize, position: usize, component: usize) -> usize {
        (layer * self.parameterized_qubits.len() + position) * 3 + component
    }
}

/// A state index prepared for encoding: its bits (qubit 1 first) and the
/// rotation angles `theta_i = phi_i = pi * b_i` they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput {
    pub state_index: usize,
    pub bits: Vec<u8>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Binary-encode a state index for an `n_qubits` register.
pub fn encode(state_index: usize, n_qubits: usize) -> Result<EncodedInput, VqcError> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(VqcError::QubitCountOutOfRange(n_qubits));
    }
    let capacity = 1usize << n_qubits;
    if state_index >= capacity {
        return Err(VqcError::StateOutOfRange { state: state_index, n_qubits, capacity });
    }
    let bits: Vec<u8> =
        (1..=n_qubits).map(|q| ((state_index >> (n_qubits - q)) & 1) as u8).collect();
    let theta: Vec<f64> = bits.iter().map(|&b| PI * b as f64).collect();
    Ok(EncodedInput { state_index, bits, phi: theta.clone(), theta })
}

/// How Q-values are evaluated.
#[derive(Debug, Clone, Copy)]
pub enum Backend<'a> {
    /// Exact probabilities from the statevector.
    Analytic,
    /// Estimate probabilities from `shots` sampled measurements. With a
    /// noise model, every shot simulates an independent error trajectory and
    /// readout bit-flips; without one, shots are drawn from the ideal state.
    Shots { shots: u32, seed: u64, noise: Option<&'a NoiseModel> },
}

/// Gradient of one Q-value with respect to every trainable parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct QGradient {
    pub thetas: Vec<f64>,
    pub bias: Vec<f64>,
}

/// A circuit spec bound to concrete parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqcModel {
    spec: CircuitSpec,
    thetas: Vec<f64>,
    bias: Vec<f64>,
}

impl VqcModel {
    /// Initialize with rotation angles drawn uniformly from `[0, 2*pi)` and
    /// zero bias.
    pub fn init_random(spec: CircuitSpec, rng: &mut impl Rng) -> Result<Self, VqcError> {
        spec.validate()?;
        let thetas = (0..spec.theta_count()).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
        let bias = vec![0.0; spec.measured_qubits.len()];
        Ok(VqcModel { spec, thetas, bias })
    }

    /// Rebuild a model from stored parameters, validating shapes.
    pub fn from_parts(
        spec: CircuitSpec,
        thetas: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self, VqcError> {
        spec.validate()?;
        if thetas.len() != spec.theta_count() {
            return Err(VqcError::ThetaCountMismatch {
                expected: spec.theta_count(),
                got: thetas.len(),
            });
        }
        if bias.len() != spec.measured_qubits.len() {
            return Err(VqcError::BiasCountMismatch {
                expected: spec.measured_qubits.len(),
                got: bias.len(),
            });
        }
        Ok(VqcModel { spec, thetas, bias })
    }

    pub fn spec(&self) -> &CircuitSpec {
        &self.spec
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// All parameters flattened: rotation angles followed by biases. The
    /// inverse of [`VqcModel::set_flat_params`].
    pub fn flat_params(&self) -> Vec<f64> {
        self.thetas.iter().chain(self.bias.iter()).copied().collect()
    }

    /// Overwrite parameters from the flattened layout.
    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), VqcError> {
        let expected = self.spec.param_count();
        if params.len() != expected {
            return Err(VqcError::ThetaCountMismatch { expected, got: params.len() });
        }
        let split = self.thetas.len();
        self.thetas.copy_from_slice(&params[..split]);
        self.bias.copy_from_slice(&params[split..]);
        Ok(())
    }

    /// The full gate sequence for one encoded input: encoding rotations on
    /// every qubit, then per layer a CNOT chain and the parameterized
    /// rotations.
    pub fn build_circuit(&self, input: &EncodedInput) -> Vec<Gate> {
        build_circuit(&self.spec, &self.thetas, input)
    }

    /// Q-values for every action (measured qubit) in the given state.
    pub fn forward(&self, state_index: usize, backend: Backend<'_>) -> Result<Vec<f64>, VqcError> {
        forward_with(&self.spec, &self.thetas, &self.bias, state_index, backend)
    }

    /// Exact gradient of `Q(state, action)` with respect to all parameters,
    /// via the parameter-shift rule on the analytic backend. `action` is the
    /// position of the measured qubit whose Q-value is differentiated.
    pub fn parameter_shift_grad(
        &self,
        state_index: usize,
        action: usize,
    ) -> Result<QGradient, VqcError> {
        let n_actions = self.spec.n_actions();
        if action >= n_actions {
            return Err(VqcError::ActionOutOfRange { action, n_actions });
        }
        let mut shifted = self.thetas.clone();
        let mut grad_thetas = vec![0.0; self.thetas.len()];
        for t in 0..self.thetas.len() {
            let original = shifted[t];
            shifted[t] = original + PI / 2.0;
            let plus =
                forward_with(&self.spec, &shifted, &self.bias, state_index, Backend::Analytic)?;
            shifted[t] = original - PI / 2.0;
            let minus =
                forward_with(&self.spec, &shifted, &self.bias, state_index, Backend::Analytic)?;
            shifted[t] = original;
            grad_thetas[t] = (plus[action] - minus[action]) / 2.0;
        }
        let mut grad_bias = vec![0.0; n_actions];
        grad_bias[action] = 1.0;
        Ok(QGradient { thetas: grad_thetas, bias: grad_bias })
    }
}

/// Build the gate sequence for `spec` with explicit rotation angles.
pub fn build_circuit(spec: &CircuitSpec, thetas: &[f64], input: &EncodedInput) -> Vec<Gate> {
    let mut gates =
        Vec::with_capacity(2 * spec.n_qubits + spec.n_layers * (spec.n_qubits.saturating_sub(1) + spec.parameterized_qubits.len()));
    for q in 1..=spec.n_qubits {
        gates.push(Gate::rx(q, input.theta[q - 1]));
        gates.push(Gate::rz(q, input.phi[q - 1]));
    }
    for layer in 0..spec.n_layers {
        for q in 1..spec.n_qubits {
            gates.push(Gate::cnot(q, q + 1));
        }
        for (position, &q) in spec.parameterized_qubits.iter().enumerate() {
            let base = spec.theta_index(layer, position, 0);
            gates.push(Gate::u3(q, thetas[base], thetas[base + 1], thetas[base + 2]));
        }
    }
    gates
}

fn forward_with(
    spec: &CircuitSpec,
    thetas: &[f64],
    bias: &[f64],
    state_index: usize,
    backend: Backend<'_>,
) -> Result<Vec<f64>, VqcError> {
    let input = encode(state_index, spec.n_qubits)?;
    let gates = build_circuit(spec, thetas, &input);
    let prob_one: Vec<f64> = match backend {
        Backend::Analytic => {
            let state = run_ideal(spec.n_qubits, &gates)?;
            spec.measured_qubits
                .iter()
                .map(|&q| state.prob_one(q))
                .collect::<Result<_, _>>()?
        }
        Backend::Shots { shots, seed, noise: None } => {
            let state = run_ideal(spec.n_qubits, &gates)?;
            let freq = state.sample_shots(shots, seed, None)?;
            spec.measured_qubits.iter().map(|&q| freq[q - 1]).collect()
        }
        Backend::Shots { shots, seed, noise: Some(model) } => {
            sample_noisy_frequencies(spec, &gates, shots, seed, model)?
        }
    };
    Ok(prob_one
        .iter()
        .zip(bias)
        .map(|(&p, &b)| match spec.observable {
            Observable::ProbOne => p + b,
            Observable::PauliZ => 1.0 - 2.0 * p + b,
        })
        .collect())
}

fn run_ideal(n_qubits: usize, gates: &[Gate]) -> Result<StateVector, VqcError> {
    let mut state = StateVector::zero_state(n_qubits)?;
    for gate in gates {
        state.apply_gate_in_place(gate)?;
    }
    Ok(state)
}

/// Estimate per-measured-qubit frequencies of 1 over `shots` independent
/// noise trajectories.
///
/// Each trajectory draws the depolarizing decisions gate by gate exactly as
/// [`StateVector::apply_noisy_gate`] would. As long as no error has fired,
/// the trajectory coincides with the ideal run, so the loop walks a
/// precomputed prefix of ideal states and only simulates explicitly from the
/// first error onward. Readout errors then flip each measured bit
/// independently.
fn sample_noisy_frequencies(
    spec: &CircuitSpec,
    gates: &[Gate],
    shots: u32,
    seed: u64,
    noise: &NoiseModel,
) -> Result<Vec<f64>, VqcError> {
    if shots == 0 {
        return Err(VqcError::Simulation(QsimError::ZeroShots));
    }
    if noise.n_qubits() != spec.n_qubits {
        return Err(VqcError::Simulation(QsimError::NoiseSizeMismatch {
            model_qubits: noise.n_qubits(),
            state_qubits: spec.n_qubits,
        }));
    }
    let mut prefixes = Vec::with_capacity(gates.len() + 1);
    prefixes.push(StateVector::zero_state(spec.n_qubits)?);
    for gate in gates {
        let mut next = prefixes.last().expect("non-empty").clone();
        next.apply_gate_in_place(gate)?;
        prefixes.push(next);
    }
    let depolarizing: Vec<f64> =
        gates.iter().map(|g| noise.depolarizing_prob(g)).collect::<Result<_, _>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ones = vec![0u64; spec.measured_qubits.len()];
    for _ in 0..shots {
        let mut diverged: Option<StateVector> = None;
        for (k, gate) in gates.iter().enumerate() {
            match diverged.as_mut() {
                Some(state) => state.apply_noisy_gate_in_place(gate, noise, &mut rng)?,
                None => {
                    for qubit in gate.qubits() {
                        match diverged.as_mut() {
                            Some(state) => {
                                state.sample_pauli_error(qubit, depolarizing[k], &mut rng);
                            }
                            None if rng.random::<f64>() < depolarizing[k] => {
                                let mut state = prefixes[k + 1].clone();
                                let which = rng.random_range(0..4usize);
                                state.apply_pauli(qubit, which);
                                diverged = Some(state);
                            }
                            None => {}
                        }
                    }
                }
            }
        }
        let final_state = diverged.as_ref().unwrap_or(prefixes.last().expect("non-empty"));
        let mut index = final_state.sample_index(&mut rng);
        for q in 1..=spec.n_qubits {
            if rng.random::<f64>() < noise.readout_flip_prob(q)? {
                index ^= 1usize << (spec.n_qubits - q);
            }
        }
        for (slot, &q) in ones.iter_mut().zip(&spec.measured_qubits) {
            if index >> (spec.n_qubits - q) & 1 == 1 {
                *slot += 1;
            }
        }
    }
    Ok(ones.iter().map(|&c| c as f64 / shots as f64).collect())
}
