//! Dual SVM solver over a precomputed kernel matrix.
//!
//! The objective maximized here is `sum_i a_i - sum_ij y_i y_j a_i a_j K_ij`
//! subject to `sum_i a_i y_i = 0` and `0 <= a_i <= C`. Note the quadratic
//! term carries no 1/2 factor, so optima land at half the textbook
//! multipliers and support vectors sit at functional margin 1/2 rather
//! than 1; the decision boundary is unchanged.

use crate::circuits::FeatureMapSpec;
use crate::encode::EncodingSpec;
use crate::error::{Error, Result};
use crate::mode::ShotMode;
use crate::qkernel::{kernel_value, KernelMatrix};
use crate::seeds;

/// Maximum number of pairwise updates before the solver gives up.
pub const MAX_SWEEPS: usize = 10_000;

/// A dual optimization instance.
#[derive(Clone, Debug)]
pub struct DualProblem {
    pub kernel: KernelMatrix,
    /// Labels in {-1, +1}; both classes must be present.
    pub labels: Vec<i8>,
    /// Box bound on the multipliers. `f64::INFINITY` recovers a hard margin.
    pub c: f64,
    /// Optimality tolerance on the worst pairwise violation.
    pub tol: f64,
}

/// Solver output.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Final objective value.
    pub objective: f64,
    /// Indices with `alpha > tol`.
    pub support_indices: Vec<usize>,
    /// False when the sweep cap was hit before reaching the tolerance.
    pub converged: bool,
    pub iterations: usize,
    /// Objective value after every pairwise update.
    pub objective_trace: Vec<f64>,
}

/// A trained quantum-kernel SVM.
#[derive(Clone, Debug)]
pub struct QsvmModel {
    pub solution: DualSolution,
    pub support_vectors: Vec<Vec<f64>>,
    /// Labels of the support vectors.
    pub sv_labels: Vec<i8>,
    pub feature_map: FeatureMapSpec,
    pub kernel_mode: ShotMode,
    pub seed: u64,
    /// Fitted featurization parameters, persisted so the model can score raw
    /// sequences again.
    pub encoding: EncodingSpec,
}

/// The dual objective value, exactly as optimized (no 1/2 factor).
pub fn dual_objective(alphas: &[f64], kernel: &KernelMatrix, labels: &[i8]) -> Result<f64> {
    let t = kernel.size();
    if alphas.len() != t || labels.len() != t {
        return Err(Error::Shape(format!(
            "objective over {} alphas / {} labels on a {t}-point kernel",
            alphas.len(),
            labels.len()
        )));
    }
    let linear: f64 = alphas.iter().sum();
    let mut quad = 0.0;
    for i in 0..t {
        for j in 0..t {
            quad += labels[i] as f64 * labels[j] as f64 * alphas[i] * alphas[j] * kernel.get(i, j);
        }
    }
    Ok(linear - quad)
}

fn validate_labels(labels: &[i8]) -> Result<()> {
    if labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::Validation("labels must be +1 or -1".into()));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(Error::Degenerate(
            "dual problem requires both classes to be present".into(),
        ));
    }
    Ok(())
}

/// Maximize the dual objective with pairwise coordinate ascent.
///
/// Each step picks the maximal violating pair (the strongest ascent
/// direction that keeps `sum a_i y_i` fixed), solves the one-dimensional
/// quadratic exactly, and clips to the box. Terminates when the violation
/// gap falls below `tol` or after [`MAX_SWEEPS`] updates.
pub fn solve_dual(problem: &DualProblem) -> Result<DualSolution> {
    let t = problem.kernel.size();
    if problem.labels.len() != t {
        return Err(Error::Shape(format!(
            "{} labels for a {t}-point kernel",
            problem.labels.len()
        )));
    }
    validate_labels(&problem.labels)?;
    if problem.c <= 0.0 {
        return Err(Error::Config("box bound C must be positive".into()));
    }

    let y: Vec<f64> = problem.labels.iter().map(|&v| v as f64).collect();
    let c = problem.c;
    let tol = problem.tol;
    // the optimized quadratic form is alpha' Y (2K) Y alpha / 2
    let q = |i: usize, j: usize| 2.0 * problem.kernel.get(i, j);

    let mut alpha = vec![0.0f64; t];
    // f_i = sum_j alpha_j y_j Q_ij, maintained incrementally
    let mut f = vec![0.0f64; t];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..MAX_SWEEPS {
        // candidate sets for raising/lowering while staying feasible
        let mut up: Option<(usize, f64)> = None;
        let mut low: Option<(usize, f64)> = None;
        for i in 0..t {
            let v = y[i] - f[i];
            let can_up = (y[i] > 0.0 && alpha[i] < c) || (y[i] < 0.0 && alpha[i] > 0.0);
            let can_low = (y[i] < 0.0 && alpha[i] < c) || (y[i] > 0.0 && alpha[i] > 0.0);
            if can_up && up.is_none_or(|(_, best)| v > best) {
                up = Some((i, v));
            }
            if can_low && low.is_none_or(|(_, best)| v < best) {
                low = Some((i, v));
            }
        }
        let (sel_up, m_up) = match up {
            Some(x) => x,
            None => {
                converged = true;
                break;
            }
        };
        let (sel_low, m_low) = match low {
            Some(x) => x,
            None => {
                converged = true;
                break;
            }
        };
        if m_up - m_low <= tol || sel_up == sel_low {
            converged = true;
            break;
        }
        // canonical index order keeps the arithmetic identical under a
        // global label flip, where the up/low roles swap
        let (i, j) = (sel_up.min(sel_low), sel_up.max(sel_low));

        // one-dimensional ascent along (delta_i, delta_j) with
        // y_i delta_i + y_j delta_j = 0, parameterized by delta = delta_j
        let err_i = f[i] - y[i];
        let err_j = f[j] - y[j];
        let eta = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(1e-12);
        let mut delta = y[j] * (err_i - err_j) / eta;
        // keep a degenerate (duplicate-row) hard-margin problem finite
        delta = delta.clamp(-1e9, 1e9);

        // box for the new alpha_j from both coordinates' constraints
        let s = y[i] * y[j];
        let (lo, hi) = if s > 0.0 {
            let gamma = alpha[i] + alpha[j];
            ((gamma - c).max(0.0), gamma.min(c))
        } else {
            let gamma = alpha[j] - alpha[i];
            (
                gamma.max(0.0),
                if c.is_finite() {
                    c.min(c + gamma)
                } else {
                    f64::INFINITY
                },
            )
        };
        let new_aj = (alpha[j] + delta).clamp(lo, hi);
        let step = new_aj - alpha[j];
        if step.abs() < 1e-14 {
            // the best pair cannot move; treat as converged at this accuracy
            converged = true;
            break;
        }
        let new_ai = alpha[i] - s * step;
        let delta_i = new_ai - alpha[i];
        alpha[j] = new_aj;
        alpha[i] = new_ai.clamp(0.0, c);

        for (k, fk) in f.iter_mut().enumerate() {
            *fk += y[i] * q(k, i) * delta_i + y[j] * q(k, j) * step;
        }
        iterations += 1;
        trace.push(dual_objective(&alpha, &problem.kernel, &problem.labels)?);
    }

    let support_indices: Vec<usize> = (0..t).filter(|&i| alpha[i] > tol).collect();
    let bias = compute_bias(&alpha, &problem.kernel, &y, c, tol, &support_indices);
    let objective = dual_objective(&alpha, &problem.kernel, &problem.labels)?;
    Ok(DualSolution {
        alphas: alpha,
        bias,
        objective,
        support_indices,
        converged,
        iterations,
        objective_trace: trace,
    })
}

/// Bias rule: the mean of `y_i - g_i` over interior support vectors, where
/// `g_i = sum_j alpha_j y_j K_ij`. With no interior vectors, fall back to
/// the midpoint between the two classes' extreme margins.
fn compute_bias(
    alpha: &[f64],
    kernel: &KernelMatrix,
    y: &[f64],
    c: f64,
    tol: f64,
    support: &[usize],
) -> f64 {
    let t = alpha.len();
    let g = |i: usize| -> f64 { (0..t).map(|j| alpha[j] * y[j] * kernel.get(i, j)).sum() };

    let interior: Vec<usize> = support
        .iter()
        .copied()
        .filter(|&i| alpha[i] > tol && alpha[i] < c - tol)
        .collect();
    if !interior.is_empty() {
        return interior.iter().map(|&i| y[i] - g(i)).sum::<f64>() / interior.len() as f64;
    }

    // midpoint rule over extreme margins; prefer support vectors per class,
    // fall back to the whole class when it has none
    let extreme = |want: f64, min: bool| -> Option<f64> {
        let pick = |candidates: &[usize]| -> Option<f64> {
            candidates
                .iter()
                .filter(|&&i| y[i] == want)
                .map(|&i| g(i))
                .fold(None, |acc: Option<f64>, v| {
                    Some(match acc {
                        None => v,
                        Some(b) => {
                            if min {
                                b.min(v)
                            } else {
                                b.max(v)
                            }
                        }
                    })
                })
        };
        pick(support).or_else(|| pick(&(0..t).collect::<Vec<_>>()))
    };
    match (extreme(1.0, true), extreme(-1.0, false)) {
        (Some(pos_min), Some(neg_max)) => -(pos_min + neg_max) / 2.0,
        _ => 0.0,
    }
}

impl QsvmModel {
    /// Assemble a model from a solved problem and the training data it was
    /// solved over.
    pub fn from_solution(
        solution: DualSolution,
        xs: &[Vec<f64>],
        labels: &[i8],
        feature_map: FeatureMapSpec,
        kernel_mode: ShotMode,
        seed: u64,
        encoding: EncodingSpec,
    ) -> Result<Self> {
        if xs.len() != labels.len() || xs.len() != solution.alphas.len() {
            return Err(Error::Shape(
                "training data and solution sizes disagree".into(),
            ));
        }
        let support_vectors: Vec<Vec<f64>> = solution
            .support_indices
            .iter()
            .map(|&i| xs[i].clone())
            .collect();
        let sv_labels: Vec<i8> = solution
            .support_indices
            .iter()
            .map(|&i| labels[i])
            .collect();
        Ok(QsvmModel {
            solution,
            support_vectors,
            sv_labels,
            feature_map,
            kernel_mode,
            seed,
            encoding,
        })
    }

    /// `sum_sv alpha_i y_i K(x_i, x) + bias`, with kernel values computed in
    /// the model's mode. Shot-mode streams are derived from the model seed
    /// and the bit pattern of `x`, so repeat calls agree.
    pub fn decision_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.feature_map.n_qubits {
            return Err(Error::Shape(format!(
                "scoring a length-{} vector with a {}-qubit model",
                x.len(),
                self.feature_map.n_qubits
            )));
        }
        let point_seed = seeds::derive_from_floats(self.seed, 0x5c07e, x);
        let mut score = self.solution.bias;
        for (idx, (sv, &label)) in self
            .support_vectors
            .iter()
            .zip(self.sv_labels.iter())
            .enumerate()
        {
            let alpha = self.solution.alphas[self.solution.support_indices[idx]];
            let k = kernel_value(
                sv,
                x,
                &self.feature_map,
                self.kernel_mode,
                seeds::derive(point_seed, &[idx as u64]),
            )?;
            score += alpha * label as f64 * k;
        }
        Ok(score)
    }

    /// Sign of the decision score; an exact tie goes to +1.
    pub fn predict(&self, x: &[f64]) -> Result<i8> {
        Ok(if self.decision_score(x)? >= 0.0 {
            1
        } else {
            -1
        })
    }

    /// Serialize to the flat key-value model format. Only support vectors
    /// and their multipliers are stored; zero rows of the solution carry no
    /// information for prediction.
    pub fn to_text(&self) -> Result<String> {
        use crate::persist;
        let mut out = String::from("format = qepitope-qsvm-v1\n");
        persist::write_feature_map(&mut out, &self.feature_map);
        persist::write_mode(&mut out, "kernel_mode", self.kernel_mode);
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!(
            "bias = {}\n",
            persist::fmt_f64(self.solution.bias)
        ));
        out.push_str(&format!(
            "objective = {}\n",
            persist::fmt_f64(self.solution.objective)
        ));
        out.push_str(&format!("converged = {}\n", self.solution.converged));
        let sv_alphas: Vec<f64> = self
            .solution
            .support_indices
            .iter()
            .map(|&i| self.solution.alphas[i])
            .collect();
        out.push_str(&format!("alphas = {}\n", persist::fmt_f64_list(&sv_alphas)));
        let labels: Vec<String> = self.sv_labels.iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("sv_labels = {}\n", labels.join(" ")));
        out.push_str(&format!("sv_count = {}\n", self.support_vectors.len()));
        for (i, sv) in self.support_vectors.iter().enumerate() {
            out.push_str(&format!("sv_{i} = {}\n", persist::fmt_f64_list(sv)));
        }
        persist::write_encoding(&mut out, &self.encoding)?;
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<QsvmModel> {
        use crate::persist;
        let kv = persist::parse_kv(text)?;
        if kv.get("format")? != "qepitope-qsvm-v1" {
            return Err(Error::Validation(format!(
                "unexpected model format {:?}",
                kv.get("format")?
            )));
        }
        let feature_map = persist::read_feature_map(&kv)?;
        let kernel_mode = persist::read_mode(&kv, "kernel_mode")?;
        let seed = kv.get_u64("seed")?;
        let bias = kv.get_f64("bias")?;
        let objective = kv.get_f64("objective")?;
        let converged = kv.get("converged")? == "true";
        let alphas = kv.get_f64_list("alphas")?;
        let sv_labels = kv.get_i8_list("sv_labels")?;
        let sv_count = kv.get_usize("sv_count")?;
        if alphas.len() != sv_count || sv_labels.len() != sv_count {
            return Err(Error::Validation(
                "support vector sections disagree in length".into(),
            ));
        }
        let mut support_vectors = Vec::with_capacity(sv_count);
        for i in 0..sv_count {
            let sv = kv.get_f64_list(&format!("sv_{i}"))?;
            if sv.len() != feature_map.n_qubits {
                return Err(Error::Validation(format!(
                    "support vector {i} has {} features for a {}-qubit map",
                    sv.len(),
                    feature_map.n_qubits
                )));
            }
            support_vectors.push(sv);
        }
        let encoding = persist::read_encoding(&kv)?;
        if encoding.n_features() != feature_map.n_qubits {
            return Err(Error::Validation(format!(
                "encoding provides {} features but the map uses {} qubits",
                encoding.n_features(),
                feature_map.n_qubits
            )));
        }
        let solution = DualSolution {
            support_indices: (0..sv_count).collect(),
            alphas,
            bias,
            objective,
            converged,
            iterations: 0,
            objective_trace: Vec::new(),
        };
        Ok(QsvmModel {
            solution,
            support_vectors,
            sv_labels,
            feature_map,
            kernel_mode,
            seed,
            encoding,
        })
    }
}
