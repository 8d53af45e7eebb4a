//! Quantum kernel values and Gram matrices, exact or shot-estimated, with
//! positive-semidefinite repair for the downstream quadratic program.

use nalgebra::DMatrix;

use crate::circuits::{build_feature_map, build_kernel_circuit, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::mode::ShotMode;
use crate::seeds;
use crate::statevector::outcome_string;

/// Symmetric matrix of kernel values over a training set.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    size: usize,
    values: Vec<f64>,
    mode: ShotMode,
}

impl KernelMatrix {
    pub fn from_values(size: usize, values: Vec<f64>, mode: ShotMode) -> Result<Self> {
        if size == 0 {
            return Err(Error::Size("kernel matrix must be non-empty".into()));
        }
        if values.len() != size * size {
            return Err(Error::Shape(format!(
                "kernel matrix of size {size} needs {} values, got {}",
                size * size,
                values.len()
            )));
        }
        Ok(KernelMatrix { size, values, mode })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mode(&self) -> ShotMode {
        self.mode
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Smallest eigenvalue of the matrix, treated as symmetric.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let m = DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j));
        let eigen = m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if eigen.is_finite() {
            Ok(eigen)
        } else {
            Err(Error::Numerical("eigendecomposition diverged".into()))
        }
    }

    /// Plain-text dump: first line is the size, then one row per line with
    /// twelve decimal places.
    pub fn to_dump(&self) -> String {
        let mut out = format!("{}\n", self.size);
        for i in 0..self.size {
            let row: Vec<String> = (0..self.size)
                .map(|j| format!("{:.12}", self.get(i, j)))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parse the dump format back, tagging the result with `mode`.
    pub fn from_dump(text: &str, mode: ShotMode) -> Result<Self> {
        let mut lines = text.lines();
        let size: usize = lines
            .next()
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: "empty kernel dump".into(),
            })?
            .trim()
            .parse()
            .map_err(|_| Error::Parse {
                line: 1,
                msg: "expected matrix size".into(),
            })?;
        let mut values = Vec::with_capacity(size * size);
        for (k, line) in lines.enumerate() {
            if k >= size {
                break;
            }
            for field in line.split_whitespace() {
                values.push(field.parse::<f64>().map_err(|_| Error::Parse {
                    line: k + 2,
                    msg: format!("bad kernel value {field:?}"),
                })?);
            }
        }
        KernelMatrix::from_values(size, values, mode)
    }
}

/// Squared overlap of the two encoded states, from direct state preparation.
pub fn kernel_exact(x_i: &[f64], x_j: &[f64], spec: &FeatureMapSpec) -> Result<f64> {
    let phi_i = build_feature_map(x_i, spec)?.execute()?;
    let phi_j = build_feature_map(x_j, spec)?.execute()?;
    let overlap = phi_i.inner_product(&phi_j)?.norm_sqr();
    Ok(overlap.clamp(0.0, 1.0))
}

/// Shot-based estimate: run the overlap circuit, count the all-zeros
/// outcome, and return its frequency.
pub fn kernel_shot_estimate(
    x_i: &[f64],
    x_j: &[f64],
    spec: &FeatureMapSpec,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::Config("shot count must be at least 1".into()));
    }
    let state = build_kernel_circuit(x_i, x_j, spec)?.execute()?;
    let counts = state.sample(shots, seed)?;
    let zeros = outcome_string(0, spec.n_qubits);
    Ok(counts.count_of(&zeros) as f64 / shots as f64)
}

/// Kernel value under the requested mode. Shot estimates draw their stream
/// from `seed` directly.
pub fn kernel_value(
    x_i: &[f64],
    x_j: &[f64],
    spec: &FeatureMapSpec,
    mode: ShotMode,
    seed: u64,
) -> Result<f64> {
    match mode {
        ShotMode::Exact => kernel_exact(x_i, x_j, spec),
        ShotMode::Shots(r) => kernel_shot_estimate(x_i, x_j, spec, r, seed),
    }
}

/// Build the Gram matrix over `xs`. Only the upper triangle is computed and
/// then mirrored, the diagonal is pinned to 1 in both modes, and in shots
/// mode cell (i, j) uses the sub-seed `derive(seed, [i, j])`.
pub fn kernel_matrix(
    xs: &[Vec<f64>],
    spec: &FeatureMapSpec,
    mode: ShotMode,
    seed: u64,
) -> Result<KernelMatrix> {
    if xs.is_empty() {
        return Err(Error::Size("kernel matrix needs at least one point".into()));
    }
    for x in xs {
        if x.len() != spec.n_qubits {
            return Err(Error::Shape(format!(
                "feature vector of length {} for a {}-qubit map",
                x.len(),
                spec.n_qubits
            )));
        }
    }
    let t = xs.len();
    let mut values = vec![0.0; t * t];
    for i in 0..t {
        values[i * t + i] = 1.0;
        for j in (i + 1)..t {
            let cell_seed = seeds::derive(seed, &[i as u64, j as u64]);
            let k = kernel_value(&xs[i], &xs[j], spec, mode, cell_seed)?;
            values[i * t + j] = k;
            values[j * t + i] = k;
        }
    }
    KernelMatrix::from_values(t, values, mode)
}

/// Clip negative eigenvalues to zero, re-symmetrize, and rescale rows and
/// columns so the diagonal is exactly 1 again. The output is positive
/// semidefinite up to numerical round-off.
pub fn regularize_psd(kernel: &KernelMatrix) -> Result<KernelMatrix> {
    let t = kernel.size();
    let m = DMatrix::from_fn(t, t, |i, j| kernel.get(i, j));
    let eigen = m.symmetric_eigen();
    let clipped = DMatrix::from_diagonal(&eigen.eigenvalues.map(|l| l.max(0.0)));
    let rebuilt = &eigen.eigenvectors * clipped * eigen.eigenvectors.transpose();
    if rebuilt.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "eigendecomposition produced non-finite values".into(),
        ));
    }
    // re-symmetrize before rescaling; the congruence transform below
    // preserves positive semidefiniteness
    let sym = (&rebuilt + rebuilt.transpose()) * 0.5;
    let mut values = vec![0.0; t * t];
    let scale: Vec<f64> = (0..t)
        .map(|i| {
            let d = sym[(i, i)];
            if d > 1e-12 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    for i in 0..t {
        for j in 0..t {
            values[i * t + j] = if i == j {
                1.0
            } else {
                sym[(i, j)] * scale[i] * scale[j]
            };
        }
    }
    KernelMatrix::from_values(t, values, kernel.mode())
}
