//! Variational quantum classifier: forward readout, sigmoid error model,
//! parameter-shift gradients, and full-batch gradient-descent training.
//!
//! The readout is the first qubit's Z basis: outcome 0 counts toward label
//! +1, outcome 1 toward label -1. The per-point loss feeds the mass on the
//! wrong label through a shot-scaled sigmoid, so driving wrong-label mass
//! down drives the loss toward its floor.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuits::{build_ansatz, build_feature_map, AnsatzSpec, FeatureMapSpec};
use crate::error::{Error, Result};
use crate::mode::ShotMode;
use crate::seeds;
use crate::statevector::Statevector;

/// Effective shot budget used by the error model when the readout itself is
/// exact. Kept small so the sigmoid stays in its responsive range across
/// the whole probability interval; large budgets saturate it and flatten
/// the loss landscape.
pub const EXACT_ERROR_SHOTS: f64 = 1.0;

/// Probability clamp for the error model, which is singular at 0 and 1.
pub const ERROR_PROB_CLAMP: f64 = 1e-6;

/// Measurement readout choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Readout {
    FirstQubitZ,
}

impl Readout {
    pub fn name(self) -> &'static str {
        match self {
            Readout::FirstQubitZ => "first_qubit_z",
        }
    }
}

/// Class-probability estimate from one circuit readout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Distribution {
    pub p_plus: f64,
    pub p_minus: f64,
    /// Shot count behind the estimate; None when read exactly.
    pub shots: Option<u64>,
}

/// A trained (or initialized) variational classifier.
#[derive(Clone, Debug)]
pub struct VqcModel {
    pub theta: Vec<f64>,
    pub ansatz: AnsatzSpec,
    pub feature_map: FeatureMapSpec,
    /// Bias term inside the error model's exponent.
    pub bias_b: f64,
    pub readout: Readout,
    pub seed: u64,
}

impl VqcModel {
    pub fn new(
        theta: Vec<f64>,
        ansatz: AnsatzSpec,
        feature_map: FeatureMapSpec,
        bias_b: f64,
        seed: u64,
    ) -> Result<Self> {
        if theta.len() != ansatz.param_count() {
            return Err(Error::Shape(format!(
                "{} parameters for an ansatz expecting {}",
                theta.len(),
                ansatz.param_count()
            )));
        }
        if ansatz.n_qubits != feature_map.n_qubits {
            return Err(Error::Shape(format!(
                "ansatz on {} qubits over a {}-qubit feature map",
                ansatz.n_qubits, feature_map.n_qubits
            )));
        }
        Ok(VqcModel {
            theta,
            ansatz,
            feature_map,
            bias_b,
            readout: Readout::FirstQubitZ,
            seed,
        })
    }

    fn encoded_state(&self, x: &[f64]) -> Result<Statevector> {
        build_feature_map(x, &self.feature_map)?.execute()
    }

    /// Serialize to the flat key-value model format, together with the
    /// fitted encoding so raw sequences can be scored later.
    pub fn to_text(&self, encoding: &crate::encode::EncodingSpec) -> Result<String> {
        use crate::persist;
        let mut out = String::from("format = qepitope-vqc-v1\n");
        persist::write_feature_map(&mut out, &self.feature_map);
        persist::write_ansatz(&mut out, &self.ansatz);
        out.push_str(&format!("readout = {}\n", self.readout.name()));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("bias_b = {}\n", persist::fmt_f64(self.bias_b)));
        out.push_str(&format!("theta = {}\n", persist::fmt_f64_list(&self.theta)));
        persist::write_encoding(&mut out, encoding)?;
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<(VqcModel, crate::encode::EncodingSpec)> {
        use crate::persist;
        let kv = persist::parse_kv(text)?;
        if kv.get("format")? != "qepitope-vqc-v1" {
            return Err(Error::Validation(format!(
                "unexpected model format {:?}",
                kv.get("format")?
            )));
        }
        let feature_map = persist::read_feature_map(&kv)?;
        let ansatz = persist::read_ansatz(&kv, feature_map.n_qubits)?;
        if kv.get("readout")? != Readout::FirstQubitZ.name() {
            return Err(Error::Validation(format!(
                "unsupported readout {:?}",
                kv.get("readout")?
            )));
        }
        let seed = kv.get_u64("seed")?;
        let bias_b = kv.get_f64("bias_b")?;
        let theta = kv.get_f64_list("theta")?;
        let encoding = persist::read_encoding(&kv)?;
        if encoding.n_features() != feature_map.n_qubits {
            return Err(Error::Validation(format!(
                "encoding provides {} features but the map uses {} qubits",
                encoding.n_features(),
                feature_map.n_qubits
            )));
        }
        let model = VqcModel::new(theta, ansatz, feature_map, bias_b, seed)?;
        Ok((model, encoding))
    }
}

/// Training hyperparameters.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub shots: ShotMode,
    pub seed: u64,
    /// Early-stop threshold on the gradient norm.
    pub convergence_tol: f64,
    /// Estimate gradients from sampled readouts instead of exact marginals.
    pub shot_gradients: bool,
    /// Also descend on the error-model bias term.
    pub train_bias: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.2,
            max_epochs: 100,
            shots: ShotMode::Exact,
            seed: 0,
            convergence_tol: 1e-6,
            shot_gradients: false,
            train_bias: false,
        }
    }
}

/// Class masses (first-qubit 0 and 1) from an already-encoded state under
/// the given ansatz parameters. In shots mode both sides come from integer
/// tallies, so each equals r_y / R exactly.
fn readout_from_encoded(
    encoded: &Statevector,
    theta: &[f64],
    ansatz: &AnsatzSpec,
    mode: ShotMode,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut state = encoded.clone();
    build_ansatz(theta, ansatz)?.run_on(&mut state)?;
    match mode {
        ShotMode::Exact => {
            let p_plus = ((1.0 + state.expectation_z(0)?) / 2.0).clamp(0.0, 1.0);
            Ok((p_plus, 1.0 - p_plus))
        }
        ShotMode::Shots(r) => {
            let counts = state.sample(r, seed)?;
            let zeros: u64 = counts
                .counts()
                .iter()
                .filter(|(outcome, _)| outcome.starts_with('0'))
                .map(|(_, &n)| n)
                .sum();
            Ok((zeros as f64 / r as f64, (r - zeros) as f64 / r as f64))
        }
    }
}

fn p_plus_from_encoded(
    encoded: &Statevector,
    theta: &[f64],
    ansatz: &AnsatzSpec,
    mode: ShotMode,
    seed: u64,
) -> Result<f64> {
    readout_from_encoded(encoded, theta, ansatz, mode, seed).map(|(p, _)| p)
}

/// Run the model circuit on `x` and read the class distribution.
pub fn forward(model: &VqcModel, x: &[f64], mode: ShotMode, seed: u64) -> Result<Distribution> {
    let encoded = model.encoded_state(x)?;
    let (p_plus, p_minus) =
        readout_from_encoded(&encoded, &model.theta, &model.ansatz, mode, seed)?;
    Ok(Distribution {
        p_plus,
        p_minus,
        shots: mode.shots(),
    })
}

/// Sigmoid error model over the wrong-label mass.
///
/// `shot_budget` sharpens the sigmoid; `bias` reweights it per class via
/// the factor `2^(-y b)`. The wrong-label mass is clamped away from 0 and 1
/// where the expression is singular.
pub fn pointwise_error(dist: &Distribution, label: i8, bias: f64, shot_budget: f64) -> f64 {
    let wrong_mass = if label == 1 {
        dist.p_minus
    } else {
        dist.p_plus
    };
    let p = wrong_mass.clamp(ERROR_PROB_CLAMP, 1.0 - ERROR_PROB_CLAMP);
    let z =
        shot_budget.sqrt() * 2f64.powf(-(label as f64) * bias) * p / (2.0 * p * (1.0 - p)).sqrt();
    sigmoid(z)
}

/// Slope of [`pointwise_error`] with respect to the wrong-label mass.
/// Zero inside the clamped regions.
fn pointwise_error_slope(wrong_mass: f64, label: i8, bias: f64, shot_budget: f64) -> f64 {
    if wrong_mass <= ERROR_PROB_CLAMP || wrong_mass >= 1.0 - ERROR_PROB_CLAMP {
        return 0.0;
    }
    let p = wrong_mass;
    let scale = shot_budget.sqrt() * 2f64.powf(-(label as f64) * bias);
    let h = (p / (2.0 * (1.0 - p))).sqrt();
    let z = scale * h;
    let s = sigmoid(z);
    // dh/dp = 1 / (4 h (1-p)^2)
    s * (1.0 - s) * scale / (4.0 * h * (1.0 - p) * (1.0 - p))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn effective_budget(mode: ShotMode) -> f64 {
    match mode {
        ShotMode::Exact => EXACT_ERROR_SHOTS,
        ShotMode::Shots(r) => r as f64,
    }
}

fn check_dataset(xs: &[Vec<f64>], ys: &[i8]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Size("empty dataset".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "{} feature vectors vs {} labels",
            xs.len(),
            ys.len()
        )));
    }
    Ok(())
}

/// Mean pointwise error over the dataset. Shot-mode readouts derive one
/// sub-seed per point from `seed`.
pub fn loss(
    model: &VqcModel,
    xs: &[Vec<f64>],
    ys: &[i8],
    mode: ShotMode,
    seed: u64,
) -> Result<f64> {
    check_dataset(xs, ys)?;
    let budget = effective_budget(mode);
    let mut total = 0.0;
    for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
        let dist = forward(model, x, mode, seeds::derive(seed, &[i as u64]))?;
        total += pointwise_error(&dist, y, model.bias_b, budget);
    }
    Ok(total / xs.len() as f64)
}

/// Gradient of the loss with respect to the ansatz parameters.
///
/// Each readout marginal is sinusoidal in each parameter, so its derivative
/// comes exactly from the two pi/2-shifted evaluations; the error model's
/// own slope is applied analytically on top. The result is the true loss
/// gradient, which central finite differences reproduce.
pub fn gradient(
    model: &VqcModel,
    xs: &[Vec<f64>],
    ys: &[i8],
    mode: ShotMode,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dataset(xs, ys)?;
    let budget = effective_budget(mode);
    let d = model.theta.len();
    let n = xs.len() as f64;
    let mut grad = vec![0.0; d];

    for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
        let encoded = model.encoded_state(x)?;
        let base_seed = seeds::derive(seed, &[i as u64, 0]);
        let p_plus = p_plus_from_encoded(&encoded, &model.theta, &model.ansatz, mode, base_seed)?;
        let wrong_mass = if y == 1 { 1.0 - p_plus } else { p_plus };
        let slope = pointwise_error_slope(wrong_mass, y, model.bias_b, budget);
        if slope == 0.0 {
            continue;
        }
        // d(wrong mass)/d(p_plus)
        let orientation = if y == 1 { -1.0 } else { 1.0 };

        let mut shifted = model.theta.clone();
        for j in 0..d {
            let original = shifted[j];
            shifted[j] = original + FRAC_PI_2;
            let plus = p_plus_from_encoded(
                &encoded,
                &shifted,
                &model.ansatz,
                mode,
                seeds::derive(seed, &[i as u64, j as u64 + 1, 1]),
            )?;
            shifted[j] = original - FRAC_PI_2;
            let minus = p_plus_from_encoded(
                &encoded,
                &shifted,
                &model.ansatz,
                mode,
                seeds::derive(seed, &[i as u64, j as u64 + 1, 2]),
            )?;
            shifted[j] = original;
            let dp = (plus - minus) / 2.0;
            grad[j] += slope * orientation * dp / n;
        }
    }
    Ok(grad)
}

/// Gradient of the loss with respect to the error-model bias term.
fn bias_gradient(
    model: &VqcModel,
    xs: &[Vec<f64>],
    ys: &[i8],
    mode: ShotMode,
    seed: u64,
) -> Result<f64> {
    let budget = effective_budget(mode);
    let ln2 = std::f64::consts::LN_2;
    let mut total = 0.0;
    for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
        let dist = forward(model, x, mode, seeds::derive(seed, &[i as u64, 7]))?;
        let wrong_mass = if y == 1 { dist.p_minus } else { dist.p_plus };
        let p = wrong_mass.clamp(ERROR_PROB_CLAMP, 1.0 - ERROR_PROB_CLAMP);
        let scale = budget.sqrt() * 2f64.powf(-(y as f64) * model.bias_b);
        let z = scale * (p / (2.0 * (1.0 - p))).sqrt();
        let s = sigmoid(z);
        total += s * (1.0 - s) * z * (-(y as f64) * ln2);
    }
    Ok(total / xs.len() as f64)
}

/// Outcome of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: VqcModel,
    /// Exact-mode loss after each completed epoch.
    pub loss_trace: Vec<f64>,
    pub epochs_run: usize,
    pub converged: bool,
}

/// Full-batch gradient descent from a seeded uniform start in [-pi, pi]^d.
///
/// Gradients default to exact readout regardless of `config.shots`, which
/// keeps sampling noise out of the shift differences; set
/// `config.shot_gradients` to sample them instead.
pub fn train(
    xs: &[Vec<f64>],
    ys: &[i8],
    feature_map: FeatureMapSpec,
    ansatz: AnsatzSpec,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    check_dataset(xs, ys)?;
    let pos = ys.iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == ys.len() {
        return Err(Error::Degenerate(
            "training requires both classes to be present".into(),
        ));
    }
    if config.learning_rate <= 0.0 {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    if config.max_epochs == 0 {
        return Err(Error::Config("max_epochs must be at least 1".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(config.seed, &[0x1217]));
    let theta0: Vec<f64> = (0..ansatz.param_count())
        .map(|_| rng.gen_range(-PI..PI))
        .collect();
    let mut model = VqcModel::new(theta0, ansatz, feature_map, 0.0, config.seed)?;

    let grad_mode = if config.shot_gradients {
        config.shots
    } else {
        ShotMode::Exact
    };

    let mut trace = Vec::new();
    let mut converged = false;
    let mut epochs_run = 0;
    for epoch in 0..config.max_epochs {
        let epoch_seed = seeds::derive(config.seed, &[0x9d, epoch as u64]);
        let grad = gradient(&model, xs, ys, grad_mode, epoch_seed)?;
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm <= config.convergence_tol {
            converged = true;
            break;
        }
        for (t, g) in model.theta.iter_mut().zip(&grad) {
            *t -= config.learning_rate * g;
        }
        if config.train_bias {
            let gb = bias_gradient(&model, xs, ys, grad_mode, epoch_seed)?;
            model.bias_b -= config.learning_rate * gb;
        }
        epochs_run += 1;
        trace.push(loss(&model, xs, ys, ShotMode::Exact, 0)?);
    }
    Ok(TrainOutcome {
        model,
        loss_trace: trace,
        epochs_run,
        converged,
    })
}

/// Label with the larger estimated mass; an exact tie goes to +1.
pub fn predict(model: &VqcModel, x: &[f64], mode: ShotMode, seed: u64) -> Result<i8> {
    let dist = forward(model, x, mode, seed)?;
    Ok(if dist.p_plus >= dist.p_minus { 1 } else { -1 })
}
