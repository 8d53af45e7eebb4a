//! Circuit construction: data-encoding feature maps, hardware-efficient
//! ansatz layers, entanglers, and kernel-overlap circuits.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crate::statevector::Gate;

use crate::error::{Error, Result};
use crate::statevector::Statevector;

/// An ordered gate list over a fixed register size.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend_from_slice(&other.gates);
    }

    /// Reversed gate order with every gate inverted.
    pub fn invert(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Run the circuit on an existing state.
    pub fn run_on(&self, state: &mut Statevector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Shape(format!(
                "{}-qubit circuit applied to a {}-qubit state",
                self.n_qubits,
                state.n_qubits()
            )));
        }
        for gate in &self.gates {
            state.apply(gate)?;
        }
        Ok(())
    }

    /// Run the circuit from the all-zeros state.
    pub fn execute(&self) -> Result<Statevector> {
        let mut state = Statevector::zero(self.n_qubits)?;
        self.run_on(&mut state)?;
        Ok(state)
    }

    /// Line-per-gate text listing, for debugging and dumps.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for gate in &self.gates {
            out.push_str(&gate.to_string());
            out.push('\n');
        }
        out
    }
}

/// Fixed two-qubit block repeated inside the ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntanglerKind {
    /// CZ on each ring pair (i, i+1 mod n); the wraparound pair is dropped
    /// for n = 2 where it would duplicate (0, 1).
    CzRing,
    /// SWAP on each chain pair (i, i+1). Note SWAP alone never entangles a
    /// product state; this variant exists for fidelity experiments.
    SwapChain,
}

impl fmt::Display for EntanglerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntanglerKind::CzRing => write!(f, "cz_ring"),
            EntanglerKind::SwapChain => write!(f, "swap_chain"),
        }
    }
}

impl FromStr for EntanglerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cz_ring" => Ok(EntanglerKind::CzRing),
            "swap_chain" => Ok(EntanglerKind::SwapChain),
            other => Err(Error::Config(format!(
                "unknown entangler {other:?}: expected cz_ring or swap_chain"
            ))),
        }
    }
}

/// Shape of the data-encoding map: one qubit per feature, `depth`
/// repetitions, and pairwise phase couplings on `entangling_pairs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub n_qubits: usize,
    pub depth: usize,
    pub entangling_pairs: Vec<(usize, usize)>,
}

impl FeatureMapSpec {
    /// Default map: linear-chain couplings (i, i+1).
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Size("feature map needs at least one qubit".into()));
        }
        if depth == 0 {
            return Err(Error::Config("feature map depth must be positive".into()));
        }
        let entangling_pairs = (0..n_qubits.saturating_sub(1))
            .map(|i| (i, i + 1))
            .collect();
        Ok(FeatureMapSpec {
            n_qubits,
            depth,
            entangling_pairs,
        })
    }

    pub fn with_pairs(mut self, pairs: Vec<(usize, usize)>) -> Result<Self> {
        for &(i, j) in &pairs {
            if i >= self.n_qubits || j >= self.n_qubits || i == j {
                return Err(Error::Wiring(format!(
                    "invalid entangling pair ({i}, {j}) for {} qubits",
                    self.n_qubits
                )));
            }
        }
        self.entangling_pairs = pairs;
        Ok(self)
    }
}

/// Trainable circuit shape: `layers` repetitions of a rotation block plus an
/// entangler, closed by a final rotation block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub layers: usize,
    pub entangler: EntanglerKind,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, layers: usize, entangler: EntanglerKind) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::Size("ansatz needs at least one qubit".into()));
        }
        if layers == 0 {
            return Err(Error::Config("ansatz layer count must be positive".into()));
        }
        Ok(AnsatzSpec {
            n_qubits,
            layers,
            entangler,
        })
    }

    /// Each rotation block holds an RY and an RZ per qubit, and there is one
    /// block before each entangler plus one after the last.
    pub fn param_count(&self) -> usize {
        2 * self.n_qubits * (self.layers + 1)
    }
}

/// Encode a feature vector. Per repetition: H on every qubit, a single-qubit
/// phase `RZ(2 x_i)` per feature, then for each coupled pair (i, j) the
/// conjugated phase `CNOT(i,j) RZ_j(2 (pi - x_i)(pi - x_j)) CNOT(i,j)`.
pub fn build_feature_map(x: &[f64], spec: &FeatureMapSpec) -> Result<Circuit> {
    if x.len() != spec.n_qubits {
        return Err(Error::Shape(format!(
            "feature vector of length {} for a {}-qubit map",
            x.len(),
            spec.n_qubits
        )));
    }
    let mut circuit = Circuit::new(spec.n_qubits);
    for _ in 0..spec.depth {
        for q in 0..spec.n_qubits {
            circuit.push(Gate::H(q));
        }
        for (q, &xq) in x.iter().enumerate() {
            circuit.push(Gate::Rz(q, 2.0 * xq));
        }
        for &(i, j) in &spec.entangling_pairs {
            circuit.push(Gate::Cnot(i, j));
            circuit.push(Gate::Rz(j, 2.0 * (PI - x[i]) * (PI - x[j])));
            circuit.push(Gate::Cnot(i, j));
        }
    }
    Ok(circuit)
}

/// The fixed entangling block.
pub fn build_entangler(n_qubits: usize, kind: EntanglerKind) -> Result<Circuit> {
    if n_qubits < 2 {
        return Err(Error::Size(format!(
            "entangler needs at least 2 qubits, got {n_qubits}"
        )));
    }
    let mut circuit = Circuit::new(n_qubits);
    match kind {
        EntanglerKind::CzRing => {
            for i in 0..n_qubits - 1 {
                circuit.push(Gate::Cz(i, i + 1));
            }
            if n_qubits > 2 {
                circuit.push(Gate::Cz(n_qubits - 1, 0));
            }
        }
        EntanglerKind::SwapChain => {
            for i in 0..n_qubits - 1 {
                circuit.push(Gate::Swap(i, i + 1));
            }
        }
    }
    Ok(circuit)
}

/// The trainable block. Parameters are consumed per rotation block in qubit
/// order, RY before RZ.
pub fn build_ansatz(theta: &[f64], spec: &AnsatzSpec) -> Result<Circuit> {
    let expected = spec.param_count();
    if theta.len() != expected {
        return Err(Error::Shape(format!(
            "ansatz expects {expected} parameters, got {}",
            theta.len()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::Numerical("ansatz parameters must be finite".into()));
    }
    let entangler = build_entangler(spec.n_qubits, spec.entangler)?;
    let mut circuit = Circuit::new(spec.n_qubits);
    let mut next = 0;
    let rotation_block = |circuit: &mut Circuit, next: &mut usize| {
        for q in 0..spec.n_qubits {
            circuit.push(Gate::Ry(q, theta[*next]));
            circuit.push(Gate::Rz(q, theta[*next + 1]));
            *next += 2;
        }
    };
    for _ in 0..spec.layers {
        rotation_block(&mut circuit, &mut next);
        circuit.extend(&entangler);
    }
    rotation_block(&mut circuit, &mut next);
    Ok(circuit)
}

/// Overlap circuit: encode `x_j`, then undo the encoding of `x_i`. The
/// probability of the all-zeros outcome equals the squared overlap of the two
/// encoded states.
pub fn build_kernel_circuit(x_i: &[f64], x_j: &[f64], spec: &FeatureMapSpec) -> Result<Circuit> {
    let mut circuit = build_feature_map(x_j, spec)?;
    let inverse = build_feature_map(x_i, spec)?.invert();
    circuit.extend(&inverse);
    Ok(circuit)
}
