//! Dense statevector simulator.
//!
//! States are full complex amplitude vectors over `2^n` basis states.
//! Qubit 0 is the least-significant bit of the basis index, everywhere.
//! Measurement outcome strings are written with qubit 0 as the first
//! character, so basis index 2 on two qubits renders as `"01"`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hard cap on the simulated register size; 2^24 amplitudes is about 256 MB.
pub const MAX_QUBITS: usize = 24;

/// A single gate from the supported set.
///
/// Rotation variants carry their angle in radians; the rest are fixed.
/// Two-qubit variants list (control, target) for `Cnot` and an unordered
/// pair for `Cz`/`Swap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    /// Qubits the gate acts on.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Y(q) | Gate::Z(q) => (q, None),
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => (q, None),
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => (a, Some(b)),
        }
    }

    /// Rotation angle, if the gate has one.
    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    /// The inverse gate: rotations negate their angle, everything else is
    /// self-inverse.
    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rx(q, a) => Gate::Rx(q, -a),
            Gate::Ry(q, a) => Gate::Ry(q, -a),
            Gate::Rz(q, a) => Gate::Rz(q, -a),
            g => g,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::X(_) => "X",
            Gate::Y(_) => "Y",
            Gate::Z(_) => "Z",
            Gate::Rx(..) => "RX",
            Gate::Ry(..) => "RY",
            Gate::Rz(..) => "RZ",
            Gate::Cnot(..) => "CNOT",
            Gate::Cz(..) => "CZ",
            Gate::Swap(..) => "SWAP",
        }
    }

    /// Check all indices against the register size and reject collisions.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        if a >= n_qubits {
            return Err(Error::Wiring(format!(
                "{} targets qubit {a} on a {n_qubits}-qubit register",
                self.label()
            )));
        }
        if let Some(b) = b {
            if b >= n_qubits {
                return Err(Error::Wiring(format!(
                    "{} targets qubit {b} on a {n_qubits}-qubit register",
                    self.label()
                )));
            }
            if a == b {
                return Err(Error::Wiring(format!(
                    "{} uses qubit {a} twice",
                    self.label()
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    /// One-line form `KIND q0[,q1][(angle)]`, used by the circuit text dump.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.qubits();
        write!(f, "{} {a}", self.label())?;
        if let Some(b) = b {
            write!(f, ",{b}")?;
        }
        if let Some(angle) = self.angle() {
            write!(f, "({angle:.12e})")?;
        }
        Ok(())
    }
}

/// Tallies from repeated measurement of a state in the computational basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementCounts {
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl MeasurementCounts {
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn count_of(&self, outcome: &str) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn frequency(&self, outcome: &str) -> f64 {
        self.count_of(outcome) as f64 / self.shots as f64
    }
}

/// Render a basis index as an outcome string, qubit 0 first.
pub fn outcome_string(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (index >> q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// A pure quantum state over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// The all-zeros computational basis state.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector {
            n_qubits,
            amplitudes,
        })
    }

    /// Build a state from explicit amplitudes. The length must be a power of
    /// two within the qubit cap and the norm must already be 1 within 1e-6.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() || len > (1 << MAX_QUBITS) {
            return Err(Error::Size(format!(
                "amplitude vector length {len} is not a supported power of two"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::Numerical(format!(
                "amplitudes are not normalized: |psi|^2 = {norm}"
            )));
        }
        Ok(Statevector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Apply one gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::H(q) => {
                let f = std::f64::consts::FRAC_1_SQRT_2;
                self.single_qubit(
                    q,
                    Complex64::new(f, 0.0),
                    Complex64::new(f, 0.0),
                    Complex64::new(f, 0.0),
                    Complex64::new(-f, 0.0),
                );
            }
            Gate::X(q) => {
                let step = 1 << q;
                for base in (0..self.amplitudes.len()).step_by(2 * step) {
                    for offset in 0..step {
                        self.amplitudes.swap(base + offset, base + offset + step);
                    }
                }
            }
            Gate::Y(q) => self.single_qubit(
                q,
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ),
            Gate::Z(q) => {
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if (i >> q) & 1 == 1 {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Rx(q, theta) => {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                self.single_qubit(
                    q,
                    Complex64::new(c, 0.0),
                    Complex64::new(0.0, -s),
                    Complex64::new(0.0, -s),
                    Complex64::new(c, 0.0),
                );
            }
            Gate::Ry(q, theta) => {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                self.single_qubit(
                    q,
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                );
            }
            Gate::Rz(q, theta) => {
                let lo = Complex64::from_polar(1.0, -theta / 2.0);
                let hi = Complex64::from_polar(1.0, theta / 2.0);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    *amp *= if (i >> q) & 1 == 0 { lo } else { hi };
                }
            }
            Gate::Cnot(control, target) => {
                let tmask = 1 << target;
                for i in 0..self.amplitudes.len() {
                    if (i >> control) & 1 == 1 && (i >> target) & 1 == 0 {
                        self.amplitudes.swap(i, i | tmask);
                    }
                }
            }
            Gate::Cz(a, b) => {
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if (i >> a) & 1 == 1 && (i >> b) & 1 == 1 {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Swap(a, b) => {
                let mask = (1 << a) | (1 << b);
                for i in 0..self.amplitudes.len() {
                    let ba = (i >> a) & 1;
                    let bb = (i >> b) & 1;
                    if ba != bb {
                        let j = i ^ mask;
                        if i < j {
                            self.amplitudes.swap(i, j);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Stride-paired update with an arbitrary 2x2 unitary on one qubit.
    fn single_qubit(
        &mut self,
        qubit: usize,
        u00: Complex64,
        u01: Complex64,
        u10: Complex64,
        u11: Complex64,
    ) {
        let step = 1 << qubit;
        for base in (0..self.amplitudes.len()).step_by(2 * step) {
            for offset in 0..step {
                let i = base + offset;
                let j = i + step;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = u00 * a + u01 * b;
                self.amplitudes[j] = u10 * a + u11 * b;
            }
        }
    }

    /// `<self|other>` with the conjugate on the left.
    pub fn inner_product(&self, other: &Statevector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Shape(format!(
                "inner product between {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Exact `<Z>` of one qubit: +1 weight where its bit is 0, -1 where 1.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::Wiring(format!(
                "expectation on qubit {qubit} of a {}-qubit register",
                self.n_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let sign = if (i >> qubit) & 1 == 0 { 1.0 } else { -1.0 };
                sign * a.norm_sqr()
            })
            .sum())
    }

    /// Draw `shots` independent outcomes from `|a_k|^2` with a ChaCha8 stream
    /// seeded by `seed`. Identical (state, shots, seed) give identical counts.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<MeasurementCounts> {
        if shots == 0 {
            return Err(Error::Config("shot count must be at least 1".into()));
        }
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in &self.amplitudes {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tallies: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let u: f64 = rng.gen();
            // partition_point returns the first index whose cumulative mass
            // exceeds u; a fully saturated u falls into the last bucket.
            let idx = cumulative
                .partition_point(|&c| c <= u)
                .min(self.amplitudes.len() - 1);
            *tallies.entry(idx).or_insert(0) += 1;
        }
        let counts = tallies
            .into_iter()
            .map(|(idx, n)| (outcome_string(idx, self.n_qubits), n))
            .collect();
        Ok(MeasurementCounts { shots, counts })
    }
}
