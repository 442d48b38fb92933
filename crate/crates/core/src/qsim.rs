//! Dense statevector simulation of small qubit registers.
//!
//! States are vectors of `2^n` complex amplitudes over the computational
//! basis. Qubits are numbered from 1 and qubit 1 is the most significant bit
//! of the basis index, so for a 4-qubit register the basis state `|1011>`
//! has index `0b1011 = 11` and qubit 2 is the only qubit in `|0>`.
//!
//! Gates are unitary and applied functionally: [`StateVector::apply_gate`]
//! returns a new state. Imperfect hardware is modelled stochastically rather
//! than with density matrices: [`StateVector::apply_noisy_gate`] follows each
//! ideal gate with a probabilistic Pauli error (a depolarizing channel,
//! sampled per trajectory) and [`StateVector::sample_shots`] can flip each
//! measured bit to model readout error. Averaging many trajectories
//! reproduces the mixed-state statistics while keeping every intermediate
//! object a pure state.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex;
// Provides cos/sin on f64 in no_std builds; configurations that link std
// resolve the inherent methods instead and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Complex amplitude type used throughout the simulator.
pub type C64 = Complex<f64>;

/// Largest register the dense simulator accepts (`2^10` amplitudes).
pub const MAX_QUBITS: usize = 10;

/// Errors from constructing or operating on simulator objects.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QsimError {
    #[error("qubit count {0} outside supported range 1..={MAX_QUBITS}")]
    QubitCountOutOfRange(usize),
    #[error("qubit index {qubit} invalid for {n_qubits}-qubit register (valid: 1..={n_qubits})")]
    QubitIndexOutOfRange { qubit: usize, n_qubits: usize },
    #[error("basis index {index} out of range for {n_qubits} qubits")]
    BasisIndexOutOfRange { index: usize, n_qubits: usize },
    #[error("expected {expected} amplitudes for {n_qubits} qubits, got {got}")]
    AmplitudeCountMismatch { n_qubits: usize, expected: usize, got: usize },
    #[error("amplitudes have squared norm {norm_sqr} but must be normalized")]
    NotNormalized { norm_sqr: f64 },
    #[error("control and target of a CNOT must differ (both {0})")]
    ControlEqualsTarget(usize),
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("noise model covers {model_qubits} qubits but register has {state_qubits}")]
    NoiseSizeMismatch { model_qubits: usize, state_qubits: usize },
    #[error("noise model has no entry for CNOT pair ({control}, {target})")]
    MissingCnotPair { control: usize, target: usize },
}

/// The gate alphabet of the simulator.
///
/// `Rx`, `Ry`, `Rz` are the standard single-qubit rotations
/// `R_j(theta) = cos(theta/2) I - i sin(theta/2) sigma_j`. `U3` is the
/// composed rotation `Rz(alpha) Ry(beta) Rz(gamma)` (rightmost factor acts
/// first), covering an arbitrary single-qubit unitary up to global phase.
/// `Cnot` flips the target when the control is `|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    U3,
    Cnot,
}

/// A gate bound to concrete qubits and angles.
///
/// `target` (and `control` for CNOT) are 1-based qubit numbers. Rotations use
/// `angles[0]`; `U3` uses all three as `(alpha, beta, gamma)`; CNOT ignores
/// the angles. Use the constructors to keep the fields consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub angles: [f64; 3],
}

impl Gate {
    /// Rotation about the X axis by `theta` on `target`.
    pub fn rx(target: usize, theta: f64) -> Self {
        Gate { kind: GateKind::Rx, target, control: None, angles: [theta, 0.0, 0.0] }
    }

    /// Rotation about the Y axis by `theta` on `target`.
    pub fn ry(target: usize, theta: f64) -> Self {
        Gate { kind: GateKind::Ry, target, control: None, angles: [theta, 0.0, 0.0] }
    }

    /// Rotation about the Z axis by `theta` on `target`.
    pub fn rz(target: usize, theta: f64) -> Self {
        Gate { kind: GateKind::Rz, target, control: None, angles: [theta, 0.0, 0.0] }
    }

    /// Composed rotation `Rz(alpha) Ry(beta) Rz(gamma)` on `target`.
    pub fn u3(target: usize, alpha: f64, beta: f64, gamma: f64) -> Self {
        Gate { kind: GateKind::U3, target, control: None, angles: [alpha, beta, gamma] }
    }

    /// Controlled NOT with the given 1-based `control` and `target`.
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate { kind: GateKind::Cnot, target, control: Some(control), angles: [0.0; 3] }
    }

    /// The 2x2 unitary of a single-qubit gate; `None` for CNOT.
    pub fn single_qubit_matrix(&self) -> Option<[[C64; 2]; 2]> {
        let theta = self.angles[0];
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        match self.kind {
            GateKind::Rx => Some([
                [C64::new(c, 0.0), C64::new(0.0, -s)],
                [C64::new(0.0, -s), C64::new(c, 0.0)],
            ]),
            GateKind::Ry => Some([
                [C64::new(c, 0.0), C64::new(-s, 0.0)],
                [C64::new(s, 0.0), C64::new(c, 0.0)],
            ]),
            GateKind::Rz => Some(rz_matrix(theta)),
            GateKind::U3 => {
                let [alpha, beta, gamma] = self.angles;
                let ry = Gate::ry(self.target, beta).single_qubit_matrix().unwrap();
                Some(mat_mul(&rz_matrix(alpha), &mat_mul(&ry, &rz_matrix(gamma))))
            }
            GateKind::Cnot => None,
        }
    }

    /// Every qubit the gate touches (control first for CNOT).
    pub(crate) fn qubits(&self) -> impl Iterator<Item = usize> {
        self.control.into_iter().chain(core::iter::once(self.target))
    }
}

fn rz_matrix(theta: f64) -> [[C64; 2]; 2] {
    let half = theta / 2.0;
    [
        [C64::new(half.cos(), -half.sin()), C64::new(0.0, 0.0)],
        [C64::new(0.0, 0.0), C64::new(half.cos(), half.sin())],
    ]
}

fn mat_mul(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Per-qubit depolarizing probabilities, one per single-qubit gate kind.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SingleQubitNoise {
    pub rx: f64,
    pub ry: f64,
    pub rz: f64,
    pub u3: f64,
}

impl SingleQubitNoise {
    /// The same depolarizing probability for every rotation kind.
    pub fn uniform(p: f64) -> Self {
        SingleQubitNoise { rx: p, ry: p, rz: p, u3: p }
    }

    fn for_kind(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::Rx => self.rx,
            GateKind::Ry => self.ry,
            GateKind::Rz => self.rz,
            GateKind::U3 => self.u3,
            GateKind::Cnot => 0.0,
        }
    }
}

/// Stochastic error model for a register: depolarizing probabilities per
/// qubit and gate kind, per ordered CNOT pair, and readout flip
/// probabilities per qubit.
///
/// CNOT entries are keyed by the ordered `(control, target)` pair; looking
/// up a pair that was never registered is an error rather than silently
/// noiseless, since it means the circuit uses a coupling the model knows
/// nothing about.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    n_qubits: usize,
    single: Vec<SingleQubitNoise>,
    cnot: BTreeMap<(usize, usize), f64>,
    readout: Vec<f64>,
}

impl NoiseModel {
    /// A model of the given size with every probability zero.
    pub fn noiseless(n_qubits: usize) -> Result<Self, QsimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QsimError::QubitCountOutOfRange(n_qubits));
        }
        Ok(NoiseModel {
            n_qubits,
            single: vec![SingleQubitNoise::default(); n_qubits],
            cnot: BTreeMap::new(),
            readout: vec![0.0; n_qubits],
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Set the per-kind depolarizing probabilities of one qubit.
    pub fn set_single(&mut self, qubit: usize, noise: SingleQubitNoise) -> Result<(), QsimError> {
        self.check_qubit(qubit)?;
        for p in [noise.rx, noise.ry, noise.rz, noise.u3] {
            check_probability(p)?;
        }
        self.single[qubit - 1] = noise;
        Ok(())
    }

    /// Set the depolarizing probability of the ordered CNOT pair.
    pub fn set_cnot(&mut self, control: usize, target: usize, p: f64) -> Result<(), QsimError> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(QsimError::ControlEqualsTarget(control));
        }
        check_probability(p)?;
        self.cnot.insert((control, target), p);
        Ok(())
    }

    /// Set the readout bit-flip probability of one qubit.
    pub fn set_readout(&mut self, qubit: usize, p: f64) -> Result<(), QsimError> {
        self.check_qubit(qubit)?;
        check_probability(p)?;
        self.readout[qubit - 1] = p;
        Ok(())
    }

    /// Depolarizing probability the model assigns to `gate`.
    pub fn depolarizing_prob(&self, gate: &Gate) -> Result<f64, QsimError> {
        match gate.kind {
            GateKind::Cnot => {
                let control = gate.control.ok_or(QsimError::MissingCnotPair {
                    control: 0,
                    target: gate.target,
                })?;
                self.cnot.get(&(control, gate.target)).copied().ok_or(
                    QsimError::MissingCnotPair { control, target: gate.target },
                )
            }
            kind => {
                self.check_qubit(gate.target)?;
                Ok(self.single[gate.target - 1].for_kind(kind))
            }
        }
    }

    /// Readout flip probability of `qubit`.
    pub fn readout_flip_prob(&self, qubit: usize) -> Result<f64, QsimError> {
        self.check_qubit(qubit)?;
        Ok(self.readout[qubit - 1])
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), QsimError> {
        if qubit == 0 || qubit > self.n_qubits {
            return Err(QsimError::QubitIndexOutOfRange { qubit, n_qubits: self.n_qubits });
        }
        Ok(())
    }
}

fn check_probability(p: f64) -> Result<(), QsimError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QsimError::InvalidProbability(p));
    }
    Ok(())
}

/// A normalized pure state of `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// The all-zeros state `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self, QsimError> {
        Self::basis_state(n_qubits, 0)
    }

    /// The computational basis state with the given index (qubit 1 is the
    /// most significant bit of the index).
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self, QsimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QsimError::QubitCountOutOfRange(n_qubits));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QsimError::BasisIndexOutOfRange { index, n_qubits });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wrap explicit amplitudes, validating length and normalization.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self, QsimError> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QsimError::QubitCountOutOfRange(n_qubits));
        }
        let expected = 1usize << n_qubits;
        if amps.len() != expected {
            return Err(QsimError::AmplitudeCountMismatch { n_qubits, expected, got: amps.len() });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(QsimError::NotNormalized { norm_sqr });
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// Sum of squared amplitude magnitudes (1 up to rounding).
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability that a projective measurement of `qubit` yields 1.
    pub fn prob_one(&self, qubit: usize) -> Result<f64, QsimError> {
        self.check_qubit(qubit)?;
        let mask = self.bit_mask(qubit);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Apply a gate, returning the new state.
    pub fn apply_gate(&self, gate: &Gate) -> Result<Self, QsimError> {
        let mut next = self.clone();
        next.apply_gate_in_place(gate)?;
        Ok(next)
    }

    /// Apply a gate followed by its depolarizing channel: with the modelled
    /// probability, a uniformly random Pauli (identity included) hits each
    /// qubit the gate touched. Averaged over trajectories this reproduces the
    /// depolarizing channel `rho -> (1 - 3p/4) rho + (p/4)(X rho X + Y rho Y
    /// + Z rho Z)`.
    pub fn apply_noisy_gate(
        &self,
        gate: &Gate,
        noise: &NoiseModel,
        rng: &mut impl Rng,
    ) -> Result<Self, QsimError> {
        let mut next = self.clone();
        next.apply_noisy_gate_in_place(gate, noise, rng)?;
        Ok(next)
    }

    pub(crate) fn apply_noisy_gate_in_place(
        &mut self,
        gate: &Gate,
        noise: &NoiseModel,
        rng: &mut impl Rng,
    ) -> Result<(), QsimError> {
        if noise.n_qubits != self.n_qubits {
            return Err(QsimError::NoiseSizeMismatch {
                model_qubits: noise.n_qubits,
                state_qubits: self.n_qubits,
            });
        }
        let p = noise.depolarizing_prob(gate)?;
        self.apply_gate_in_place(gate)?;
        for qubit in gate.qubits() {
            self.sample_pauli_error(qubit, p, rng);
        }
        Ok(())
    }

    /// Draw the depolarizing decision for one qubit and apply the outcome.
    /// Exposed within the crate so callers replaying cached trajectory
    /// prefixes consume the random stream identically.
    pub(crate) fn sample_pauli_error(&mut self, qubit: usize, p: f64, rng: &mut impl Rng) -> bool {
        if rng.random::<f64>() < p {
            let which = rng.random_range(0..4usize);
            self.apply_pauli(qubit, which);
            true
        } else {
            false
        }
    }

    /// Apply the Pauli selected by `which` (0 identity, 1 X, 2 Y, 3 Z).
    pub(crate) fn apply_pauli(&mut self, qubit: usize, which: usize) {
        match which {
            0 => {} // identity: the channel keeps the state intact
            1 => self.apply_pauli_x(qubit),
            2 => self.apply_pauli_y(qubit),
            _ => self.apply_pauli_z(qubit),
        }
    }

    /// Sample `shots` projective measurements of all qubits and return the
    /// per-qubit frequency of outcome 1 (a vector of `n_qubits` values in
    /// `[0, 1]`). When a noise model is given, its readout error flips each
    /// measured bit independently. Deterministic for a fixed `seed`.
    pub fn sample_shots(
        &self,
        shots: u32,
        seed: u64,
        noise: Option<&NoiseModel>,
    ) -> Result<Vec<f64>, QsimError> {
        if shots == 0 {
            return Err(QsimError::ZeroShots);
        }
        if let Some(model) = noise {
            if model.n_qubits != self.n_qubits {
                return Err(QsimError::NoiseSizeMismatch {
                    model_qubits: model.n_qubits,
                    state_qubits: self.n_qubits,
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cdf = self.cumulative_probabilities();
        let mut ones = vec![0u64; self.n_qubits];
        for _ in 0..shots {
            let mut index = sample_from_cdf(&cdf, rng.random::<f64>());
            if let Some(model) = noise {
                for qubit in 1..=self.n_qubits {
                    if model.readout[qubit - 1] > 0.0
                        && rng.random::<f64>() < model.readout[qubit - 1]
                    {
                        index ^= self.bit_mask(qubit);
                    }
                }
            }
            for (qubit, count) in ones.iter_mut().enumerate() {
                if index & self.bit_mask(qubit + 1) != 0 {
                    *count += 1;
                }
            }
        }
        Ok(ones.iter().map(|&c| c as f64 / shots as f64).collect())
    }

    /// Draw one basis-state index from the Born distribution using the
    /// caller's generator (used for per-trajectory sampling under noise).
    pub fn sample_index(&self, rng: &mut impl Rng) -> usize {
        sample_from_cdf(&self.cumulative_probabilities(), rng.random::<f64>())
    }

    fn cumulative_probabilities(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.amps
            .iter()
            .map(|a| {
                acc += a.norm_sqr();
                acc
            })
            .collect()
    }

    pub(crate) fn apply_gate_in_place(&mut self, gate: &Gate) -> Result<(), QsimError> {
        for qubit in gate.qubits() {
            self.check_qubit(qubit)?;
        }
        match gate.kind {
            GateKind::Cnot => {
                let control = gate.control.expect("cnot constructor sets control");
                if control == gate.target {
                    return Err(QsimError::ControlEqualsTarget(control));
                }
                let (cmask, tmask) = (self.bit_mask(control), self.bit_mask(gate.target));
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
            _ => {
                if gate.control.is_some() {
                    return Err(QsimError::ControlEqualsTarget(gate.target));
                }
                let m = gate.single_qubit_matrix().expect("rotation kinds have a matrix");
                let mask = self.bit_mask(gate.target);
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                        self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                        self.amps[i | mask] = m[1][0] * a0 + m[1][1] * a1;
                    }
                }
            }
        }
        Ok(())
    }

    fn apply_pauli_x(&mut self, qubit: usize) {
        let mask = self.bit_mask(qubit);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                self.amps.swap(i, i | mask);
            }
        }
    }

    fn apply_pauli_y(&mut self, qubit: usize) {
        let mask = self.bit_mask(qubit);
        let i_unit = C64::new(0.0, 1.0);
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = -i_unit * a1;
                self.amps[i | mask] = i_unit * a0;
            }
        }
    }

    fn apply_pauli_z(&mut self, qubit: usize) {
        let mask = self.bit_mask(qubit);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask != 0 {
                *amp = -*amp;
            }
        }
    }

    /// Index mask selecting the bit of 1-based `qubit` (qubit 1 = MSB).
    fn bit_mask(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), QsimError> {
        if qubit == 0 || qubit > self.n_qubits {
            return Err(QsimError::QubitIndexOutOfRange { qubit, n_qubits: self.n_qubits });
        }
        Ok(())
    }
}

fn sample_from_cdf(cdf: &[f64], r: f64) -> usize {
    // Binary search for the first entry strictly above r; rounding in the
    // final entry is absorbed by clamping to the last index.
    let mut lo = 0usize;
    let mut hi = cdf.len() - 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        if cdf[mid] > r {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}
