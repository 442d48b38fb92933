//! Simulation and learning kernels for variational quantum reinforcement
//! learning on desk-scale problems.
//!
//! The crate is split along the data flow of an experiment:
//!
//! * [`qsim`] — dense statevector simulation of up to ten qubits, with
//!   rotation/CNOT/composed-rotation gates, projective shot sampling, and a
//!   stochastic-trajectory noise channel.
//! * [`vqc`] — the variational circuit used as a Q-function: computational
//!   basis encoding of a discrete state, layered entangle-and-rotate ansatz,
//!   measured-qubit readout with additive output bias, and parameter-shift
//!   gradients.
//! * [`envs`] — the two benchmark environments (a 4x4 gridworld over ice and
//!   a periodic-occupancy radio-channel task) behind a common trait.
//! * [`rl`] — epsilon-greedy deep Q-learning with experience replay and a
//!   target network, an RMSprop optimizer, and tabular Q-learning/SARSA
//!   baselines.
//! * [`device`] — calibration-data parsing for superconducting backends and
//!   synthesis of a per-qubit noise model from it.
//!
//! Everything here is `no_std` (with `alloc`): parsing works on in-memory
//! strings and all randomness comes through caller-supplied seeds, so the
//! kernels behave identically wherever they are embedded. File IO, CLI
//! plumbing, and run orchestration live in the companion `vqrl-lab` crate.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod device;
pub mod envs;
pub mod qsim;
pub mod rl;
pub mod vqc;
