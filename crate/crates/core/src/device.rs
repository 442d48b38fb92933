//! Device-property tables and noise-model synthesis.
//!
//! Real superconducting backends publish calibration snapshots: per-qubit
//! relaxation/dephasing times and gate errors, shared single-qubit gate
//! lengths, and per-coupling CNOT errors. This module parses such tables
//! from a sectioned CSV, validates them, and turns them into a
//! [`NoiseModel`](crate::qsim::NoiseModel) for the simulator by mapping the
//! circuit's linear CNOT chain onto a directed path of device qubits.
//!
//! # File format
//!
//! Plain text, one value table per section. Blank lines and lines starting
//! with `#` are ignored. Each section opens with its bracketed name followed
//! by a fixed header row:
//!
//! ```text
//! [qubits]
//! qubit,t1_us,t2_us,frequency_ghz,id_error,u1_error,u2_error,u3_error,readout_error
//! 0,61.985008,63.458383,4.919976,0.001207,0.0,0.001207,0.002413,0.032
//! [gates]
//! gate,length_ns
//! id,113.7778
//! u1,0.0
//! u2,103.1111
//! u3,206.2222
//! [couplings]
//! control,target,cnot_error,cnot_length_ns
//! 0,1,0.019174,455.1111
//! ```
//!
//! Qubit rows must appear in index order. The `[gates]` section needs all
//! four of `id`, `u1`, `u2`, `u3`. Couplings are ordered pairs: `0,1` says a
//! CNOT with control 0 and target 1 is available, independently of `1,0`.
//!
//! # Noise synthesis
//!
//! Every single-qubit rotation on a device qubit gets the depolarizing
//! probability `max(u3_error, 1 - exp(-u3_length / T1))`: the reported gate
//! error, floored by the chance of relaxation during the gate. CNOT
//! probabilities come straight from the coupling table and readout flips
//! from the per-qubit readout error; everything is clamped to `[0, 1]`.
//! Dephasing times and qubit frequencies are carried as metadata but do not
//! enter the synthesis.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::qsim::{NoiseModel, QsimError, SingleQubitNoise, MAX_QUBITS};

/// Errors from parsing, validating, or mapping device tables.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("device file is missing the [{0}] section")]
    MissingSection(&'static str),
    #[error("gate length table has no {0} entry")]
    MissingGateLength(&'static str),
    #[error("device must list at least one qubit")]
    NoQubits,
    #[error("qubit {qubit}: {field} must be positive and finite, got {value}")]
    NonPositive { qubit: usize, field: &'static str, value: f64 },
    #[error("qubit {qubit}: {field} must lie in [0, 1], got {value}")]
    ErrorOutOfRange { qubit: usize, field: &'static str, value: f64 },
    #[error("qubit {qubit}: U1 is a software frame change and must have zero error, got {value}")]
    U1ErrorNonZero { qubit: usize, value: f64 },
    #[error("{gate} gate length must be finite and non-negative, got {value}")]
    BadGateLength { gate: &'static str, value: f64 },
    #[error("coupling [{control}, {target}]: {message}")]
    BadCoupling { control: usize, target: usize, message: String },
    #[error("device qubit {qubit} out of range for a device with {n_qubits} qubits")]
    DeviceQubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("a register of {got} qubits is unsupported; expected 1 to {max}")]
    RegisterSizeOutOfRange { got: usize, max: usize },
    #[error("assignment repeats device qubit {qubit}")]
    DuplicateAssignment { qubit: usize },
    #[error("device has no [{control}, {target}] coupling required by the chain layout")]
    MissingCoupling { control: usize, target: usize },
    #[error("no directed chain of {n} distinct device qubits exists")]
    NoChainAvailable { n: usize },
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// Calibration snapshot of one device qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitProperties {
    /// Relaxation time in microseconds.
    pub t1_us: f64,
    /// Dephasing time in microseconds (metadata; unused by the synthesis).
    pub t2_us: f64,
    /// Transition frequency in gigahertz (metadata; unused by the synthesis).
    pub frequency_ghz: f64,
    pub id_error: f64,
    /// Always zero: U1 is implemented as a software frame change.
    pub u1_error: f64,
    pub u2_error: f64,
    pub u3_error: f64,
    /// Probability of misreading this qubit at measurement.
    pub readout_error: f64,
}

/// Durations shared by every qubit's single-qubit gates, in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateLengths {
    pub id_ns: f64,
    pub u1_ns: f64,
    pub u2_ns: f64,
    pub u3_ns: f64,
}

/// One directed CNOT coupling between device qubits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub control: usize,
    pub target: usize,
    pub cnot_error: f64,
    pub cnot_length_ns: f64,
}

/// Full calibration table of a device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProperties {
    pub qubits: Vec<QubitProperties>,
    pub gate_lengths: GateLengths,
    pub couplings: Vec<Coupling>,
}

/// Bundled calibration table of the 20-qubit `ibmq-poughkeepsie` device.
pub const IBMQ_POUGHKEEPSIE_CSV: &str = include_str!("../data/devices/ibmq-poughkeepsie.csv");

/// Bundled calibration table of the 5-qubit `ibmq-valencia` device.
pub const IBMQ_VALENCIA_CSV: &str = include_str!("../data/devices/ibmq-valencia.csv");

/// Look up a bundled device table by name.
pub fn bundled_device(name: &str) -> Option<&'static str> {
    match name {
        "ibmq-poughkeepsie" => Some(IBMQ_POUGHKEEPSIE_CSV),
        "ibmq-valencia" => Some(IBMQ_VALENCIA_CSV),
        _ => None,
    }
}

const QUBIT_COLUMNS: [&str; 9] = [
    "qubit",
    "t1_us",
    "t2_us",
    "frequency_ghz",
    "id_error",
    "u1_error",
    "u2_error",
    "u3_error",
    "readout_error",
];
const GATE_COLUMNS: [&str; 2] = ["gate", "length_ns"];
const COUPLING_COLUMNS: [&str; 4] = ["control", "target", "cnot_error", "cnot_length_ns"];
const GATE_NAMES: [&str; 4] = ["id", "u1", "u2", "u3"];

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Qubits,
    Gates,
    Couplings,
}

impl DeviceProperties {
    /// Parse and validate a sectioned-CSV device table.
    pub fn parse(text: &str) -> Result<Self, DeviceError> {
        let mut section = Section::None;
        let mut seen = [false; 3];
        let mut header_pending = false;
        let mut qubits: Vec<QubitProperties> = Vec::new();
        let mut lengths: [Option<f64>; 4] = [None; 4];
        let mut couplings: Vec<Coupling> = Vec::new();

        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let row = raw.trim();
            if row.is_empty() || row.starts_with('#') {
                continue;
            }
            if let Some(name) = row.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| DeviceError::Parse {
                    line,
                    message: format!("unterminated section header '{row}'"),
                })?;
                let slot = match name {
                    "qubits" => (Section::Qubits, 0),
                    "gates" => (Section::Gates, 1),
                    "couplings" => (Section::Couplings, 2),
                    other => {
                        return Err(DeviceError::Parse {
                            line,
                            message: format!("unknown section [{other}]"),
                        })
                    }
                };
                if seen[slot.1] {
                    return Err(DeviceError::Parse {
                        line,
                        message: format!("section [{name}] appears twice"),
                    });
                }
                seen[slot.1] = true;
                section = slot.0;
                header_pending = true;
                continue;
            }
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            match section {
                Section::None => {
                    return Err(DeviceError::Parse {
                        line,
                        message: String::from("data before any section header"),
                    })
                }
                Section::Qubits => {
                    if header_pending {
                        expect_header(&fields, &QUBIT_COLUMNS, line)?;
                        header_pending = false;
                        continue;
                    }
                    expect_width(&fields, QUBIT_COLUMNS.len(), line)?;
                    let qubit = parse_usize(fields[0], line)?;
                    if qubit != qubits.len() {
                        return Err(DeviceError::Parse {
                            line,
                            message: format!(
                                "qubit rows must be in order; expected {}, got {qubit}",
                                qubits.len()
                            ),
                        });
                    }
                    qubits.push(QubitProperties {
                        t1_us: parse_f64(fields[1], line)?,
                        t2_us: parse_f64(fields[2], line)?,
                        frequency_ghz: parse_f64(fields[3], line)?,
                        id_error: parse_f64(fields[4], line)?,
                        u1_error: parse_f64(fields[5], line)?,
                        u2_error: parse_f64(fields[6], line)?,
                        u3_error: parse_f64(fields[7], line)?,
                        readout_error: parse_f64(fields[8], line)?,
                    });
                }
                Section::Gates => {
                    if header_pending {
                        expect_header(&fields, &GATE_COLUMNS, line)?;
                        header_pending = false;
                        continue;
                    }
                    expect_width(&fields, GATE_COLUMNS.len(), line)?;
                    let slot = GATE_NAMES.iter().position(|&g| g == fields[0]).ok_or_else(
                        || DeviceError::Parse {
                            line,
                            message: format!("unknown gate '{}'", fields[0]),
                        },
                    )?;
                    if lengths[slot].is_some() {
                        return Err(DeviceError::Parse {
                            line,
                            message: format!("gate '{}' listed twice", fields[0]),
                        });
                    }
                    lengths[slot] = Some(parse_f64(fields[1], line)?);
                }
                Section::Couplings => {
                    if header_pending {
                        expect_header(&fields, &COUPLING_COLUMNS, line)?;
                        header_pending = false;
                        continue;
                    }
                    expect_width(&fields, COUPLING_COLUMNS.len(), line)?;
                    let control = parse_usize(fields[0], line)?;
                    let target = parse_usize(fields[1], line)?;
                    if couplings.iter().any(|c| c.control == control && c.target == target) {
                        return Err(DeviceError::Parse {
                            line,
                            message: format!("coupling [{control}, {target}] listed twice"),
                        });
                    }
                    couplings.push(Coupling {
                        control,
                        target,
                        cnot_error: parse_f64(fields[2], line)?,
                        cnot_length_ns: parse_f64(fields[3], line)?,
                    });
                }
            }
        }

        if !seen[0] {
            return Err(DeviceError::MissingSection("qubits"));
        }
        if !seen[1] {
            return Err(DeviceError::MissingSection("gates"));
        }
        if !seen[2] {
            return Err(DeviceError::MissingSection("couplings"));
        }
        let gate_lengths = GateLengths {
            id_ns: lengths[0].ok_or(DeviceError::MissingGateLength("id"))?,
            u1_ns: lengths[1].ok_or(DeviceError::MissingGateLength("u1"))?,
            u2_ns: lengths[2].ok_or(DeviceError::MissingGateLength("u2"))?,
            u3_ns: lengths[3].ok_or(DeviceError::MissingGateLength("u3"))?,
        };
        let props = DeviceProperties { qubits, gate_lengths, couplings };
        props.validate()?;
        Ok(props)
    }

    /// Render the table back into the same sectioned-CSV format.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "[qubits]");
        let _ = writeln!(out, "{}", QUBIT_COLUMNS.join(","));
        for (index, q) in self.qubits.iter().enumerate() {
            let _ = writeln!(
                out,
                "{index},{},{},{},{},{},{},{},{}",
                q.t1_us,
                q.t2_us,
                q.frequency_ghz,
                q.id_error,
                q.u1_error,
                q.u2_error,
                q.u3_error,
                q.readout_error
            );
        }
        let _ = writeln!(out, "[gates]");
        let _ = writeln!(out, "{}", GATE_COLUMNS.join(","));
        let _ = writeln!(out, "id,{}", self.gate_lengths.id_ns);
        let _ = writeln!(out, "u1,{}", self.gate_lengths.u1_ns);
        let _ = writeln!(out, "u2,{}", self.gate_lengths.u2_ns);
        let _ = writeln!(out, "u3,{}", self.gate_lengths.u3_ns);
        let _ = writeln!(out, "[couplings]");
        let _ = writeln!(out, "{}", COUPLING_COLUMNS.join(","));
        for c in &self.couplings {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c.control, c.target, c.cnot_error, c.cnot_length_ns
            );
        }
        out
    }

    /// Check every table invariant.
    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.qubits.is_empty() {
            return Err(DeviceError::NoQubits);
        }
        for (qubit, q) in self.qubits.iter().enumerate() {
            for (field, value) in [
                ("t1_us", q.t1_us),
                ("t2_us", q.t2_us),
                ("frequency_ghz", q.frequency_ghz),
            ] {
                if !value.is_finite() || value <= 0.0 {
                    return Err(DeviceError::NonPositive { qubit, field, value });
                }
            }
            for (field, value) in [
                ("id_error", q.id_error),
                ("u1_error", q.u1_error),
                ("u2_error", q.u2_error),
                ("u3_error", q.u3_error),
                ("readout_error", q.readout_error),
            ] {
                if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                    return Err(DeviceError::ErrorOutOfRange { qubit, field, value });
                }
            }
            if q.u1_error != 0.0 {
                return Err(DeviceError::U1ErrorNonZero { qubit, value: q.u1_error });
            }
        }
        for (gate, value) in [
            ("id", self.gate_lengths.id_ns),
            ("u1", self.gate_lengths.u1_ns),
            ("u2", self.gate_lengths.u2_ns),
            ("u3", self.gate_lengths.u3_ns),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(DeviceError::BadGateLength { gate, value });
            }
        }
        for (index, c) in self.couplings.iter().enumerate() {
            let bad = |message: String| DeviceError::BadCoupling {
                control: c.control,
                target: c.target,
                message,
            };
            if c.control >= self.qubits.len() || c.target >= self.qubits.len() {
                return Err(bad(format!("device has only {} qubits", self.qubits.len())));
            }
            if c.control == c.target {
                return Err(bad(String::from("control and target coincide")));
            }
            if !c.cnot_error.is_finite() || !(0.0..=1.0).contains(&c.cnot_error) {
                return Err(bad(format!("cnot_error {} outside [0, 1]", c.cnot_error)));
            }
            if !c.cnot_length_ns.is_finite() || c.cnot_length_ns < 0.0 {
                return Err(bad(format!("cnot_length_ns {} is negative", c.cnot_length_ns)));
            }
            if self.couplings[..index]
                .iter()
                .any(|p| p.control == c.control && p.target == c.target)
            {
                return Err(bad(String::from("listed twice")));
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.qubits.len()
    }

    /// The directed coupling `control -> target`, if the device has it.
    pub fn coupling(&self, control: usize, target: usize) -> Option<&Coupling> {
        self.couplings.iter().find(|c| c.control == control && c.target == target)
    }

    /// Depolarizing probability synthesized for single-qubit rotations on
    /// one device qubit: the U3 gate error, floored by the probability of
    /// relaxing during the gate, `1 - exp(-u3_length / T1)`.
    pub fn single_qubit_depolarizing(&self, device_qubit: usize) -> Result<f64, DeviceError> {
        let q = self.qubits.get(device_qubit).ok_or(DeviceError::DeviceQubitOutOfRange {
            qubit: device_qubit,
            n_qubits: self.qubits.len(),
        })?;
        let relaxation = 1.0 - libm::exp(-self.gate_lengths.u3_ns / (q.t1_us * 1000.0));
        Ok(clamp01(q.u3_error.max(relaxation)))
    }

    /// Build a simulator noise model for a register whose logical qubit `i`
    /// (1-based) lives on device qubit `assignment[i - 1]`. The circuit's
    /// CNOT chain needs every directed coupling
    /// `assignment[i - 1] -> assignment[i]` to exist.
    pub fn synthesize_noise_model(&self, assignment: &[usize]) -> Result<NoiseModel, DeviceError> {
        self.validate()?;
        self.check_assignment(assignment)?;
        let mut model = NoiseModel::noiseless(assignment.len())?;
        for (logical, &device_qubit) in assignment.iter().enumerate() {
            let logical = logical + 1;
            let p = self.single_qubit_depolarizing(device_qubit)?;
            model.set_single(logical, SingleQubitNoise::uniform(p))?;
            model.set_readout(logical, clamp01(self.qubits[device_qubit].readout_error))?;
        }
        for logical in 1..assignment.len() {
            let control = assignment[logical - 1];
            let target = assignment[logical];
            let coupling = self
                .coupling(control, target)
                .ok_or(DeviceError::MissingCoupling { control, target })?;
            model.set_cnot(logical, logical + 1, clamp01(coupling.cnot_error))?;
        }
        Ok(model)
    }

    /// Find the lexicographically smallest directed path of `n` distinct
    /// device qubits through the coupling graph, suitable as an assignment
    /// for an `n`-qubit register.
    pub fn auto_assignment(&self, n: usize) -> Result<Vec<usize>, DeviceError> {
        self.validate()?;
        if n == 0 || n > MAX_QUBITS {
            return Err(DeviceError::RegisterSizeOutOfRange { got: n, max: MAX_QUBITS });
        }
        if n > self.qubits.len() {
            return Err(DeviceError::NoChainAvailable { n });
        }
        let mut adjacency = vec![Vec::new(); self.qubits.len()];
        for c in &self.couplings {
            adjacency[c.control].push(c.target);
        }
        for neighbors in &mut adjacency {
            neighbors.sort_unstable();
        }
        for start in 0..self.qubits.len() {
            let mut path = vec![start];
            let mut used = vec![false; self.qubits.len()];
            used[start] = true;
            if extend_path(&mut path, &mut used, &adjacency, n) {
                return Ok(path);
            }
        }
        Err(DeviceError::NoChainAvailable { n })
    }

    fn check_assignment(&self, assignment: &[usize]) -> Result<(), DeviceError> {
        if assignment.is_empty() || assignment.len() > MAX_QUBITS {
            return Err(DeviceError::RegisterSizeOutOfRange {
                got: assignment.len(),
                max: MAX_QUBITS,
            });
        }
        for (index, &qubit) in assignment.iter().enumerate() {
            if qubit >= self.qubits.len() {
                return Err(DeviceError::DeviceQubitOutOfRange {
                    qubit,
                    n_qubits: self.qubits.len(),
                });
            }
            if assignment[..index].contains(&qubit) {
                return Err(DeviceError::DuplicateAssignment { qubit });
            }
        }
        Ok(())
    }
}

/// Depth-first search for a simple directed path, visiting neighbors in
/// ascending order so the first hit is the lexicographically smallest.
fn extend_path(
    path: &mut Vec<usize>,
    used: &mut Vec<bool>,
    adjacency: &[Vec<usize>],
    n: usize,
) -> bool {
    if path.len() == n {
        return true;
    }
    let last = *path.last().expect("path always starts with one vertex");
    for &next in &adjacency[last] {
        if !used[next] {
            used[next] = true;
            path.push(next);
            if extend_path(path, used, adjacency, n) {
                return true;
            }
            path.pop();
            used[next] = false;
        }
    }
    false
}

fn clamp01(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn expect_header(fields: &[&str], columns: &[&str], line: usize) -> Result<(), DeviceError> {
    if fields != columns {
        return Err(DeviceError::Parse {
            line,
            message: format!("expected header '{}'", columns.join(",")),
        });
    }
    Ok(())
}

fn expect_width(fields: &[&str], width: usize, line: usize) -> Result<(), DeviceError> {
    if fields.len() != width {
        return Err(DeviceError::Parse {
            line,
            message: format!("expected {width} comma-separated values, got {}", fields.len()),
        });
    }
    Ok(())
}

fn parse_f64(token: &str, line: usize) -> Result<f64, DeviceError> {
    token.parse().map_err(|_| DeviceError::Parse {
        line,
        message: format!("expected a number, got '{token}'"),
    })
}

fn parse_usize(token: &str, line: usize) -> Result<usize, DeviceError> {
    token.parse().map_err(|_| DeviceError::Parse {
        line,
        message: format!("expected a qubit index, got '{token}'"),
    })
}
