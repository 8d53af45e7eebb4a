//! Command-line orchestration of the full pipeline: `kernel`, `train`,
//! `eval`, and `report`.
//!
//! Exit codes: 0 success, 1 empty or degenerate input, 2 usage or
//! validation errors, 3 internal numerical failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::circuits::{AnsatzSpec, EntanglerKind, FeatureMapSpec};
use crate::dualsvm::{solve_dual, DualProblem, QsvmModel};
use crate::encode::{self, EncodingSpec};
use crate::error::{Error, Result};
use crate::metrics::{self, EvalReport, ModelKind};
use crate::mode::ShotMode;
use crate::qkernel;
use crate::report::{
    quantum_reference_rows, render_comparison, Artifacts, BoxBound, EvalRunReport, RunConfig,
    RunReport,
};
use crate::seeds;
use crate::vqc::{self, TrainConfig, VqcModel};

/// Ansatz depth used by the `train` command.
const ANSATZ_LAYERS: usize = 1;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "QEPITOPE_OUT";

const KERNEL_SEED_TAG: u64 = 0x6b65726e;
const SCORE_SEED_TAG: u64 = 0x73636f72;
const PRED_SEED_TAG: u64 = 0x70726564;

#[derive(Parser)]
#[command(
    name = "qepitope",
    about = "Quantum-kernel SVM and variational quantum classifier for peptide epitope data",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute and dump the training-split kernel matrix.
    Kernel(RunArgs),
    /// Train a model and write its report, artifacts, and metrics.
    Train(RunArgs),
    /// Evaluate a persisted model on a dataset.
    Eval(EvalArgs),
    /// Render a comparison table over the reports in a directory.
    Report(ReportArgs),
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// Input CSV with a sequence,label header.
    #[arg(long)]
    data: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Classifier: qsvm or vqc.
    #[arg(long)]
    model: Option<String>,
    /// Readout mode: "exact" or a shot count.
    #[arg(long)]
    shots: Option<String>,
    /// Master seed; required here or in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Qubit count (= number of encoding scales, 2 or 3).
    #[arg(long)]
    qubits: Option<usize>,
    /// Feature-map repetitions.
    #[arg(long)]
    depth: Option<usize>,
    /// Entangler: cz_ring or swap_chain.
    #[arg(long)]
    entangler: Option<String>,
    /// Dual box bound; "inf" for a hard margin.
    #[arg(long)]
    c: Option<String>,
    /// Solver tolerance (dual KKT gap / gradient-norm stop).
    #[arg(long)]
    tol: Option<f64>,
    /// Gradient-descent learning rate.
    #[arg(long)]
    lr: Option<f64>,
    /// Gradient-descent epoch cap.
    #[arg(long)]
    epochs: Option<usize>,
    /// Held-out fraction in (0, 1).
    #[arg(long)]
    test_fraction: Option<f64>,
    /// Preserve class proportions in the split.
    #[arg(long)]
    stratified: Option<bool>,
    /// Output directory (default: $QEPITOPE_OUT or ./runs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Persisted model file.
    #[arg(long)]
    model: PathBuf,
    /// Dataset to evaluate on.
    #[arg(long)]
    data: PathBuf,
    /// Output directory for the evaluation report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory holding run reports (searched one level deep).
    run_dir: PathBuf,
}

/// Optional values from a JSON config file. Flag > file > default.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    data: Option<String>,
    model: Option<String>,
    shots: Option<String>,
    seed: Option<u64>,
    qubits: Option<usize>,
    depth: Option<usize>,
    entangler: Option<String>,
    c: Option<String>,
    tol: Option<f64>,
    lr: Option<f64>,
    epochs: Option<usize>,
    test_fraction: Option<f64>,
    stratified: Option<bool>,
    out: Option<String>,
}

fn parse_model(s: &str) -> Result<ModelKind> {
    match s {
        "qsvm" => Ok(ModelKind::Qsvm),
        "vqc" => Ok(ModelKind::Vqc),
        other => Err(Error::Config(format!(
            "unknown model {other:?}: expected qsvm or vqc"
        ))),
    }
}

fn resolve_config(args: &RunArgs) -> Result<RunConfig> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("bad config file {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };

    let data = args
        .data
        .as_ref()
        .map(|p| p.display().to_string())
        .or(file.data)
        .ok_or_else(|| Error::Config("missing --data (or \"data\" in the config file)".into()))?;
    let model = parse_model(
        args.model
            .as_deref()
            .or(file.model.as_deref())
            .unwrap_or("qsvm"),
    )?;
    let shots: ShotMode = args
        .shots
        .as_deref()
        .or(file.shots.as_deref())
        .unwrap_or("exact")
        .parse()?;
    let seed = args.seed.or(file.seed).ok_or_else(|| {
        Error::Config("a seed is required: --seed or \"seed\" in the config".into())
    })?;
    let qubits = args.qubits.or(file.qubits).unwrap_or(2);
    let depth = args.depth.or(file.depth).unwrap_or(2);
    let entangler: EntanglerKind = args
        .entangler
        .as_deref()
        .or(file.entangler.as_deref())
        .unwrap_or("cz_ring")
        .parse()?;
    let c: BoxBound = args
        .c
        .as_deref()
        .or(file.c.as_deref())
        .unwrap_or("1.0")
        .parse()?;
    let tol = args.tol.or(file.tol).unwrap_or(1e-6);
    let lr = args.lr.or(file.lr).unwrap_or(0.2);
    let epochs = args.epochs.or(file.epochs).unwrap_or(100);
    let test_fraction = args.test_fraction.or(file.test_fraction).unwrap_or(0.3);
    let stratified = args.stratified.or(file.stratified).unwrap_or(true);
    let out = args
        .out
        .as_ref()
        .map(|p| p.display().to_string())
        .or(file.out)
        .or_else(|| std::env::var(OUT_DIR_ENV).ok())
        .unwrap_or_else(|| "runs".into());

    if !(0.0..1.0).contains(&test_fraction) || test_fraction == 0.0 {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if tol <= 0.0 {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    if lr <= 0.0 {
        return Err(Error::Config("learning rate must be positive".into()));
    }
    if epochs == 0 {
        return Err(Error::Config("epoch cap must be at least 1".into()));
    }
    EncodingSpec::for_features(qubits)?; // validates the qubit count early

    Ok(RunConfig {
        data,
        model,
        qubits,
        depth,
        entangler,
        shots,
        c,
        tol,
        lr,
        epochs,
        test_fraction,
        stratified,
        seed,
        out,
    })
}

/// Load, split, fit the encoder on the training split, and featurize both
/// splits.
struct PreparedData {
    encoding: EncodingSpec,
    train_x: Vec<Vec<f64>>,
    train_y: Vec<i8>,
    test_x: Vec<Vec<f64>>,
    test_y: Vec<i8>,
}

fn prepare(config: &RunConfig) -> Result<PreparedData> {
    let data = encode::load_dataset(Path::new(&config.data))?;
    if data.is_empty() {
        return Err(Error::Degenerate(format!(
            "dataset {} holds no records",
            config.data
        )));
    }
    let (train, test) = encode::split(&data, config.test_fraction, config.seed, config.stratified)?;
    let (pos, neg) = train.class_counts();
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate(
            "training split lost one of the classes".into(),
        ));
    }
    if test.is_empty() {
        return Err(Error::Degenerate("test split is empty".into()));
    }
    let spec = EncodingSpec::for_features(config.qubits)?;
    let encoding = encode::fit_normalization(&train, &spec)?;
    let (train_x, train_y) = encode::encode_all(&train, &encoding)?;
    let (test_x, test_y) = encode::encode_all(&test, &encoding)?;
    Ok(PreparedData {
        encoding,
        train_x,
        train_y,
        test_x,
        test_y,
    })
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<String> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(name.to_string())
}

fn cmd_kernel(config: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let prepared = prepare(config)?;
    let fm = FeatureMapSpec::new(config.qubits, config.depth)?;
    let kernel = qkernel::kernel_matrix(
        &prepared.train_x,
        &fm,
        config.shots,
        seeds::derive(config.seed, &[KERNEL_SEED_TAG]),
    )?;
    let out = PathBuf::from(&config.out);
    write_file(&out, "kernel.txt", &kernel.to_dump())?;
    println!("t = {}", kernel.size());
    println!("mode = {}", config.shots);
    println!("wrote {}", out.join("kernel.txt").display());
    println!("elapsed = {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn eval_qsvm(model: &QsvmModel, xs: &[Vec<f64>], ys: &[i8]) -> Result<EvalReport> {
    let scores = xs
        .iter()
        .map(|x| model.decision_score(x))
        .collect::<Result<Vec<f64>>>()?;
    let preds: Vec<i8> = scores
        .iter()
        .map(|&s| if s >= 0.0 { 1 } else { -1 })
        .collect();
    metrics::evaluate(ys, &preds, &scores, ModelKind::Qsvm)
}

fn eval_vqc(
    model: &VqcModel,
    xs: &[Vec<f64>],
    ys: &[i8],
    mode: ShotMode,
    seed: u64,
    tag: u64,
) -> Result<EvalReport> {
    let mut preds = Vec::with_capacity(xs.len());
    let mut scores = Vec::with_capacity(xs.len());
    for (i, x) in xs.iter().enumerate() {
        preds.push(vqc::predict(
            model,
            x,
            mode,
            seeds::derive(seed, &[PRED_SEED_TAG, tag, i as u64]),
        )?);
        // ranking scores always come from the exact marginal
        scores.push(vqc::forward(model, x, ShotMode::Exact, 0)?.p_plus);
    }
    metrics::evaluate(ys, &preds, &scores, ModelKind::Vqc)
}

fn cmd_train(config: &RunConfig) -> Result<()> {
    let started = Instant::now();
    let prepared = prepare(config)?;
    let out = PathBuf::from(&config.out);
    let fm = FeatureMapSpec::new(config.qubits, config.depth)?;

    let (train_eval, test_eval, artifacts, warning) = match config.model {
        ModelKind::Qsvm => {
            let mut kernel = qkernel::kernel_matrix(
                &prepared.train_x,
                &fm,
                config.shots,
                seeds::derive(config.seed, &[KERNEL_SEED_TAG]),
            )?;
            // shot noise can push the Gram matrix off the PSD cone
            if !config.shots.is_exact() && kernel.min_eigenvalue()? < -1e-8 {
                kernel = qkernel::regularize_psd(&kernel)?;
            }
            let kernel_dump = write_file(&out, "kernel.txt", &kernel.to_dump())?;
            let solution = solve_dual(&DualProblem {
                kernel,
                labels: prepared.train_y.clone(),
                c: config.c.0,
                tol: config.tol,
            })?;
            let warning = !solution.converged;
            let model = QsvmModel::from_solution(
                solution,
                &prepared.train_x,
                &prepared.train_y,
                fm,
                config.shots,
                seeds::derive(config.seed, &[SCORE_SEED_TAG]),
                prepared.encoding.clone(),
            )?;
            let model_file = write_file(&out, "qsvm.model", &model.to_text()?)?;
            let train_eval = eval_qsvm(&model, &prepared.train_x, &prepared.train_y)?;
            let test_eval = eval_qsvm(&model, &prepared.test_x, &prepared.test_y)?;
            (
                train_eval,
                test_eval,
                Artifacts {
                    model_file,
                    kernel_dump: Some(kernel_dump),
                    loss_trace: None,
                },
                warning,
            )
        }
        ModelKind::Vqc => {
            let ansatz = AnsatzSpec::new(config.qubits, ANSATZ_LAYERS, config.entangler)?;
            let tc = TrainConfig {
                learning_rate: config.lr,
                max_epochs: config.epochs,
                shots: config.shots,
                seed: config.seed,
                convergence_tol: config.tol,
                shot_gradients: false,
                train_bias: false,
            };
            let outcome = vqc::train(&prepared.train_x, &prepared.train_y, fm, ansatz, &tc)?;
            let mut trace_text = String::new();
            for (epoch, loss) in outcome.loss_trace.iter().enumerate() {
                trace_text.push_str(&format!("{} {loss:.12e}\n", epoch + 1));
            }
            let loss_trace = write_file(&out, "loss_trace.txt", &trace_text)?;
            let model_file = write_file(
                &out,
                "vqc.model",
                &outcome.model.to_text(&prepared.encoding)?,
            )?;
            let train_eval = eval_vqc(
                &outcome.model,
                &prepared.train_x,
                &prepared.train_y,
                config.shots,
                config.seed,
                0,
            )?;
            let test_eval = eval_vqc(
                &outcome.model,
                &prepared.test_x,
                &prepared.test_y,
                config.shots,
                config.seed,
                1,
            )?;
            (
                train_eval,
                test_eval,
                Artifacts {
                    model_file,
                    kernel_dump: None,
                    loss_trace: Some(loss_trace),
                },
                false,
            )
        }
    };

    let report = RunReport {
        model: config.model,
        config: config.clone(),
        train: train_eval,
        test: test_eval,
        artifacts,
        convergence_warning: warning,
        reference: quantum_reference_rows(),
    };
    write_file(&out, "report.json", &report.to_json())?;

    println!(
        "{} train: acc {:.4} auc {:.4} mcc {:+.4}",
        config.model, report.train.acc, report.train.auc, report.train.mcc
    );
    println!(
        "{} test:  acc {:.4} auc {:.4} mcc {:+.4}",
        config.model, report.test.acc, report.test.auc, report.test.mcc
    );
    if warning {
        println!("warning: solver hit its iteration cap before converging");
    }
    println!("wrote {}", out.join("report.json").display());
    println!("elapsed = {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let started = Instant::now();
    let text = std::fs::read_to_string(&args.model)?;
    let data = encode::load_dataset(&args.data)?;
    if data.is_empty() {
        return Err(Error::Degenerate(format!(
            "dataset {} holds no records",
            args.data.display()
        )));
    }

    let (kind, eval) = if text.starts_with("format = qepitope-qsvm-v1") {
        let model = QsvmModel::from_text(&text)?;
        let (xs, ys) = encode::encode_all(&data, &model.encoding)?;
        (ModelKind::Qsvm, eval_qsvm(&model, &xs, &ys)?)
    } else if text.starts_with("format = qepitope-vqc-v1") {
        let (model, encoding) = VqcModel::from_text(&text)?;
        let (xs, ys) = encode::encode_all(&data, &encoding)?;
        (
            ModelKind::Vqc,
            eval_vqc(&model, &xs, &ys, ShotMode::Exact, model.seed, 2)?,
        )
    } else {
        return Err(Error::Validation(format!(
            "{} is not a recognized model file",
            args.model.display()
        )));
    };

    let report = EvalRunReport {
        model: kind,
        model_file: args.model.display().to_string(),
        data: args.data.display().to_string(),
        eval,
        reference: quantum_reference_rows(),
    };
    let out = args
        .out
        .clone()
        .or_else(|| std::env::var(OUT_DIR_ENV).ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    write_file(&out, "eval_report.json", &report.to_json())?;
    println!(
        "{kind} eval: acc {:.4} auc {:.4} mcc {:+.4}",
        report.eval.acc, report.eval.auc, report.eval.mcc
    );
    println!("wrote {}", out.join("eval_report.json").display());
    println!("elapsed = {:.2}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let mut candidates: Vec<PathBuf> = Vec::new();
    let entries = std::fs::read_dir(&args.run_dir)?;
    for entry in entries.flatten() {
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "json") {
            candidates.push(path);
        } else if path.is_dir() {
            let nested = path.join("report.json");
            if nested.exists() {
                candidates.push(nested);
            }
        }
    }
    candidates.sort();

    let mut runs: Vec<(String, RunReport)> = Vec::new();
    for path in &candidates {
        let name = if path.file_name().is_some_and(|f| f == "report.json") {
            path.parent()
                .and_then(|p| p.file_name())
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string())
        } else {
            path.file_stem()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string())
        };
        match std::fs::read_to_string(path)
            .map_err(Error::from)
            .and_then(|t| RunReport::from_json(&t))
        {
            Ok(report) => runs.push((name, report)),
            Err(e) => eprintln!("skipping {}: {e}", path.display()),
        }
    }
    if runs.is_empty() {
        return Err(Error::Degenerate(format!(
            "no readable run reports under {}",
            args.run_dir.display()
        )));
    }
    let borrowed: Vec<(String, &RunReport)> = runs.iter().map(|(n, r)| (n.clone(), r)).collect();
    print!("{}", render_comparison(&borrowed));
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Degenerate(_) | Error::Size(_) => 1,
        Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Kernel(args) => cmd_kernel(&resolve_config(&args)?),
        Command::Train(args) => cmd_train(&resolve_config(&args)?),
        Command::Eval(args) => cmd_eval(&args),
        Command::Report(args) => cmd_report(&args),
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
