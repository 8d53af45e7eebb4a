//! Acceptance suite: one test per release criterion, each printing a
//! PASS line and enforcing its runtime budget. Run with
//! `cargo test --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qepitope::circuits::{
    build_feature_map, build_kernel_circuit, AnsatzSpec, EntanglerKind, FeatureMapSpec, Gate,
};
use qepitope::datagen::{parse_feature_csv, FeaturePoint};
use qepitope::dualsvm::{solve_dual, DualProblem, QsvmModel};
use qepitope::encode::EncodingSpec;
use qepitope::metrics::{accuracy, confusion, mcc, roc_auc, ConfusionCounts};
use qepitope::qkernel::{
    kernel_exact, kernel_matrix, kernel_shot_estimate, regularize_psd, KernelMatrix,
};
use qepitope::report::RunReport;
use qepitope::statevector::Statevector;
use qepitope::vqc::{self, TrainConfig, VqcModel};
use qepitope::ShotMode;

fn finish(name: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "{name}: took {elapsed:?}, budget {budget:?}"
    );
    println!("ACCEPTANCE PASS: {name} ({elapsed:?})");
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
    let mut state = Statevector::zero(n).unwrap();
    for q in 0..n {
        state.apply(&Gate::Ry(q, rng.gen_range(-PI..PI))).unwrap();
        state.apply(&Gate::Rz(q, rng.gen_range(-PI..PI))).unwrap();
        if q + 1 < n {
            state.apply(&Gate::Cnot(q, q + 1)).unwrap();
        }
    }
    state
}

fn random_gate(n: usize, rng: &mut ChaCha8Rng) -> Gate {
    let q = rng.gen_range(0..n);
    match rng.gen_range(0..10) {
        0 => Gate::H(q),
        1 => Gate::X(q),
        2 => Gate::Y(q),
        3 => Gate::Z(q),
        4 => Gate::Rx(q, rng.gen_range(-PI..PI)),
        5 => Gate::Ry(q, rng.gen_range(-PI..PI)),
        6 => Gate::Rz(q, rng.gen_range(-PI..PI)),
        k => {
            if n < 2 {
                Gate::H(q)
            } else {
                let mut p = rng.gen_range(0..n);
                while p == q {
                    p = rng.gen_range(0..n);
                }
                match k {
                    7 => Gate::Cnot(q, p),
                    8 => Gate::Cz(q, p),
                    _ => Gate::Swap(q, p),
                }
            }
        }
    }
}

#[test]
fn criterion_01_simulator_matches_dense_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);

    // every gate kind on every wiring choice for 1..=4 qubits, against the
    // dense-matrix oracle on random states
    for n in 1..=4usize {
        let mut gates: Vec<Gate> = Vec::new();
        for q in 0..n {
            gates.extend([Gate::H(q), Gate::X(q), Gate::Y(q), Gate::Z(q)]);
            for angle in [0.0, 0.37, -2.4, PI] {
                gates.extend([Gate::Rx(q, angle), Gate::Ry(q, angle), Gate::Rz(q, angle)]);
            }
            for p in 0..n {
                if p != q {
                    gates.extend([Gate::Cnot(q, p), Gate::Cz(q, p), Gate::Swap(q, p)]);
                }
            }
        }
        for gate in gates {
            for _ in 0..3 {
                let state = random_state(n, &mut rng);
                let expected =
                    common::apply_unitary(&common::gate_unitary(&gate, n), state.amplitudes());
                let mut applied = state.clone();
                applied.apply(&gate).unwrap();
                for (a, b) in applied.amplitudes().iter().zip(&expected) {
                    assert!(
                        (a - b).norm() <= 1e-12,
                        "{gate:?} on {n} qubits deviates from the dense oracle"
                    );
                }
            }
        }
    }

    // norm drift over 200 random depth-50 circuits on up to 10 qubits
    for _ in 0..200 {
        let n = rng.gen_range(1..=10usize);
        let mut state = Statevector::zero(n).unwrap();
        for _ in 0..50 {
            state.apply(&random_gate(n, &mut rng)).unwrap();
        }
        assert!((state.norm_sqr() - 1.0).abs() <= 1e-10);
    }

    finish(
        "simulator gate application vs dense oracle",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_02_overlap_circuit_matches_inner_product() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    for trial in 0..100 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let spec = FeatureMapSpec::new(n, 2).unwrap();
        let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
        let xj: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
        let direct = {
            let phi_i = build_feature_map(&xi, &spec).unwrap().execute().unwrap();
            let phi_j = build_feature_map(&xj, &spec).unwrap().execute().unwrap();
            phi_i.inner_product(&phi_j).unwrap().norm_sqr()
        };
        let overlap = build_kernel_circuit(&xi, &xj, &spec)
            .unwrap()
            .execute()
            .unwrap()
            .probability(0);
        assert!(
            (direct - overlap).abs() <= 1e-10,
            "trial {trial}: direct {direct} vs overlap {overlap}"
        );
    }
    finish(
        "overlap-circuit kernel vs direct inner product",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_03_shot_estimates_concentrate_and_scale() {
    let started = Instant::now();
    let spec = FeatureMapSpec::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..50)
        .map(|_| {
            (
                (0..2).map(|_| rng.gen_range(-PI..PI)).collect(),
                (0..2).map(|_| rng.gen_range(-PI..PI)).collect(),
            )
        })
        .collect();

    let shots = 8192u64;
    let mut inside = 0;
    for (trial, (xi, xj)) in pairs.iter().enumerate() {
        let exact = kernel_exact(xi, xj, &spec).unwrap();
        let est = kernel_shot_estimate(xi, xj, &spec, shots, trial as u64).unwrap();
        let bound = 4.0 * (exact * (1.0 - exact) / shots as f64).sqrt() + 1e-3;
        if (est - exact).abs() <= bound {
            inside += 1;
        }
    }
    assert!(
        inside >= 48,
        "only {inside}/50 estimates within the 4-sigma bound"
    );

    let mae = |shots: u64, tag: u64| -> f64 {
        pairs
            .iter()
            .enumerate()
            .map(|(trial, (xi, xj))| {
                let exact = kernel_exact(xi, xj, &spec).unwrap();
                let est = kernel_shot_estimate(xi, xj, &spec, shots, tag + trial as u64).unwrap();
                (est - exact).abs()
            })
            .sum::<f64>()
            / pairs.len() as f64
    };
    let ratio = mae(2048, 1000) / mae(8192, 2000);
    assert!(
        (1.5..=2.5).contains(&ratio),
        "quadrupling shots scaled the error by {ratio}, expected about 2"
    );

    finish(
        "shot-estimate concentration and scaling",
        started,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_04_gram_matrices_are_psd() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);

    for trial in 0..20 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let t = rng.gen_range(2..=10);
        let spec = FeatureMapSpec::new(n, 2).unwrap();
        let pts: Vec<Vec<f64>> = (0..t)
            .map(|_| (0..n).map(|_| rng.gen_range(-PI..PI)).collect())
            .collect();
        let gram = kernel_matrix(&pts, &spec, ShotMode::Exact, 0).unwrap();
        assert!(gram.min_eigenvalue().unwrap() >= -1e-8);
    }

    // adversarial noisy matrices: symmetric perturbations of valid Grams
    for trial in 0..20u64 {
        let t = rng.gen_range(3..=8);
        let spec = FeatureMapSpec::new(2, 2).unwrap();
        let pts: Vec<Vec<f64>> = (0..t)
            .map(|_| (0..2).map(|_| rng.gen_range(-PI..PI)).collect())
            .collect();
        let gram = kernel_matrix(&pts, &spec, ShotMode::Exact, 0).unwrap();
        let mut noisy = gram.values().to_vec();
        for i in 0..t {
            for j in (i + 1)..t {
                let bump = rng.gen_range(-0.2..0.2);
                let v = (gram.get(i, j) + bump).clamp(0.0, 1.0);
                noisy[i * t + j] = v;
                noisy[j * t + i] = v;
            }
        }
        let noisy = KernelMatrix::from_values(t, noisy, ShotMode::Shots(64)).unwrap();
        let repaired = regularize_psd(&noisy).unwrap();
        assert!(
            repaired.min_eigenvalue().unwrap() >= -1e-8,
            "trial {trial}: repair left the matrix indefinite"
        );
    }

    // the canonical indefinite 2x2
    let bad = KernelMatrix::from_values(2, vec![1.0, 1.2, 1.2, 1.0], ShotMode::Shots(64)).unwrap();
    assert!(regularize_psd(&bad).unwrap().min_eigenvalue().unwrap() >= -1e-8);

    finish(
        "exact Grams PSD and PSD repair on noisy inputs",
        started,
        Duration::from_secs(10),
    );
}

#[test]
fn criterion_05_dual_solver_matches_grid_search() {
    let started = Instant::now();

    // orthogonal two-point problem has the closed-form optimum (1/2, 1/2)
    let identity = KernelMatrix::from_values(2, vec![1.0, 0.0, 0.0, 1.0], ShotMode::Exact).unwrap();
    let sol = solve_dual(&DualProblem {
        kernel: identity,
        labels: vec![1, -1],
        c: f64::INFINITY,
        tol: 1e-8,
    })
    .unwrap();
    assert!((sol.alphas[0] - 0.5).abs() <= 1e-6);
    assert!((sol.alphas[1] - 0.5).abs() <= 1e-6);

    // twenty random 3- and 4-point problems against the grid oracle
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
    for trial in 0..20 {
        let t = if trial % 2 == 0 { 3 } else { 4 };
        let spec = FeatureMapSpec::new(2, 2).unwrap();
        let pts: Vec<Vec<f64>> = (0..t)
            .map(|_| (0..2).map(|_| rng.gen_range(-PI..PI)).collect())
            .collect();
        let mut labels: Vec<i8> = (0..t)
            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        labels[0] = 1;
        labels[1] = -1;
        let kernel = kernel_matrix(&pts, &spec, ShotMode::Exact, 0).unwrap();
        let sol = solve_dual(&DualProblem {
            kernel: kernel.clone(),
            labels: labels.clone(),
            c: 1.0,
            tol: 1e-8,
        })
        .unwrap();
        let (coarse, fine) = if t == 3 { (1e-3, 1e-3) } else { (0.02, 1e-3) };
        let grid = common::grid_search_dual(&kernel, &labels, 1.0, coarse, fine);
        assert!(
            (sol.objective - grid).abs() <= 1e-4,
            "trial {trial}: solver {} vs grid {grid}",
            sol.objective
        );
    }

    finish(
        "dual solver vs exhaustive grid search",
        started,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_06_parameter_shift_matches_finite_differences() {
    let started = Instant::now();
    let xs = vec![
        vec![0.5, 0.5],
        vec![-0.5, -0.5],
        vec![1.2, -0.7],
        vec![-1.0, 0.9],
    ];
    let ys = vec![1i8, -1, 1, -1];
    let fm = FeatureMapSpec::new(2, 2).unwrap();
    let ansatz = AnsatzSpec::new(2, 1, EntanglerKind::CzRing).unwrap();
    let h = 1e-4;

    for seed in 101..=105u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta: Vec<f64> = (0..ansatz.param_count())
            .map(|_| rng.gen_range(-PI..PI))
            .collect();
        let model = VqcModel::new(theta, ansatz.clone(), fm.clone(), 0.0, seed).unwrap();
        let grad = vqc::gradient(&model, &xs, &ys, ShotMode::Exact, 0).unwrap();
        let mut worst: f64 = 0.0;
        for (j, g) in grad.iter().enumerate() {
            let mut plus = model.clone();
            plus.theta[j] += h;
            let mut minus = model.clone();
            minus.theta[j] -= h;
            let fd = (vqc::loss(&plus, &xs, &ys, ShotMode::Exact, 0).unwrap()
                - vqc::loss(&minus, &xs, &ys, ShotMode::Exact, 0).unwrap())
                / (2.0 * h);
            worst = worst.max((g - fd).abs());
        }
        assert!(
            worst <= 1e-3,
            "seed {seed}: worst coordinate deviation {worst}"
        );
    }

    finish(
        "parameter-shift gradient vs central finite differences",
        started,
        Duration::from_secs(30),
    );
}

fn load_separable() -> (Vec<FeaturePoint>, Vec<FeaturePoint>) {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let train = parse_feature_csv(
        &std::fs::read_to_string(dir.join("synthetic_separable_train.csv")).unwrap(),
    )
    .unwrap();
    let test = parse_feature_csv(
        &std::fs::read_to_string(dir.join("synthetic_separable_test.csv")).unwrap(),
    )
    .unwrap();
    (train, test)
}

fn majority_fraction(ys: &[i8]) -> f64 {
    let pos = ys.iter().filter(|&&y| y == 1).count();
    pos.max(ys.len() - pos) as f64 / ys.len() as f64
}

#[test]
fn criterion_07_models_learn_the_separable_dataset() {
    let started = Instant::now();
    let (train_pts, test_pts) = load_separable();
    assert_eq!(train_pts.len(), 40);
    assert_eq!(test_pts.len(), 40);
    let train_x: Vec<Vec<f64>> = train_pts.iter().map(|p| p.x.clone()).collect();
    let train_y: Vec<i8> = train_pts.iter().map(|p| p.label).collect();
    let test_x: Vec<Vec<f64>> = test_pts.iter().map(|p| p.x.clone()).collect();
    let test_y: Vec<i8> = test_pts.iter().map(|p| p.label).collect();
    let fm = FeatureMapSpec::new(2, 2).unwrap();

    // exact-kernel QSVM generalizes
    let kernel = kernel_matrix(&train_x, &fm, ShotMode::Exact, 0).unwrap();
    let sol = solve_dual(&DualProblem {
        kernel,
        labels: train_y.clone(),
        c: 1.0,
        tol: 1e-6,
    })
    .unwrap();
    let qsvm = QsvmModel::from_solution(
        sol,
        &train_x,
        &train_y,
        fm.clone(),
        ShotMode::Exact,
        1,
        EncodingSpec::for_features(2).unwrap(),
    )
    .unwrap();
    let qsvm_test_acc = test_x
        .iter()
        .zip(&test_y)
        .filter(|(x, &y)| qsvm.predict(x).unwrap() == y)
        .count() as f64
        / test_y.len() as f64;
    assert!(qsvm_test_acc >= 0.95, "qsvm test accuracy {qsvm_test_acc}");
    assert!(
        qsvm_test_acc > majority_fraction(&test_y),
        "qsvm does not beat the majority baseline"
    );

    // VQC trains within 200 epochs for at least 4 of 5 fixed seeds
    let ansatz = AnsatzSpec::new(2, 1, EntanglerKind::CzRing).unwrap();
    let mut wins = 0;
    let mut best_train_acc: f64 = 0.0;
    for seed in 1..=5u64 {
        let config = TrainConfig {
            learning_rate: 0.5,
            max_epochs: 200,
            shots: ShotMode::Exact,
            seed,
            convergence_tol: 1e-9,
            ..TrainConfig::default()
        };
        let outcome = vqc::train(&train_x, &train_y, fm.clone(), ansatz.clone(), &config).unwrap();
        let train_acc = train_x
            .iter()
            .zip(&train_y)
            .filter(|(x, &y)| vqc::predict(&outcome.model, x, ShotMode::Exact, 0).unwrap() == y)
            .count() as f64
            / train_y.len() as f64;
        if train_acc >= 0.90 {
            wins += 1;
        }
        best_train_acc = best_train_acc.max(train_acc);
    }
    assert!(wins >= 4, "only {wins}/5 seeds reached 0.90 train accuracy");
    assert!(
        best_train_acc > majority_fraction(&train_y),
        "vqc does not beat the majority baseline"
    );

    finish(
        "end-to-end learnability on the separable dataset",
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_08_metric_oracles() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC8);

    // pair-statistic AUC equals direct enumeration exactly
    for _ in 0..200 {
        let n = rng.gen_range(4..25);
        let mut labels: Vec<i8> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 1 } else { -1 })
            .collect();
        labels[0] = 1;
        labels[1] = -1;
        let scores: Vec<f64> = (0..n)
            .map(|_| (rng.gen_range(-4..=4) as f64) / 4.0)
            .collect();
        let expected = {
            let mut favorable = 0.0;
            let mut pairs = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if labels[i] == 1 && labels[j] == -1 {
                        pairs += 1.0;
                        if scores[i] > scores[j] {
                            favorable += 1.0;
                        } else if scores[i] == scores[j] {
                            favorable += 0.5;
                        }
                    }
                }
            }
            favorable / pairs
        };
        assert_eq!(roc_auc(&labels, &scores).unwrap(), expected);
    }

    // mcc matches the direct formula, including zero-denominator cases
    for _ in 0..200 {
        let c = ConfusionCounts {
            true_pos: rng.gen_range(0..8),
            false_pos: rng.gen_range(0..8),
            true_neg: rng.gen_range(0..8),
            false_neg: rng.gen_range(0..8),
        };
        if c.total() == 0 {
            continue;
        }
        let (tp, fp, tn, fneg) = (
            c.true_pos as f64,
            c.false_pos as f64,
            c.true_neg as f64,
            c.false_neg as f64,
        );
        let denom = (tp + fp) * (tp + fneg) * (tn + fp) * (tn + fneg);
        let expected = if denom == 0.0 {
            0.0
        } else {
            (tp * tn - fp * fneg) / denom.sqrt()
        };
        assert_eq!(mcc(&c).unwrap(), expected);
    }

    // trivial extremes
    let perfect = confusion(&[1, -1, 1, -1], &[1, -1, 1, -1]).unwrap();
    assert_eq!(accuracy(&perfect).unwrap(), 1.0);
    assert_eq!(mcc(&perfect).unwrap(), 1.0);
    let inverted = confusion(&[1, -1, 1, -1], &[-1, 1, -1, 1]).unwrap();
    assert_eq!(mcc(&inverted).unwrap(), -1.0);

    finish("metric oracles", started, Duration::from_secs(5));
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qepitope"))
        .args(args)
        .output()
        .expect("spawn qepitope")
}

#[test]
fn criterion_09_pipeline_smoke_on_bundled_sample() {
    let started = Instant::now();
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample_epitopes.csv");
    let data = data.to_str().unwrap();

    for model in ["qsvm", "vqc"] {
        let out_dir = tempfile::tempdir().unwrap();
        let out = out_dir.path().to_str().unwrap();
        let t0 = Instant::now();
        let output = run_cli(&[
            "train", "--model", model, "--data", data, "--qubits", "2", "--seed", "7", "--epochs",
            "60", "--out", out,
        ]);
        let elapsed = t0.elapsed();
        assert!(
            output.status.success(),
            "{model} train failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        assert!(
            elapsed <= Duration::from_secs(120),
            "{model} train took {elapsed:?}"
        );
        let report = RunReport::from_json(
            &std::fs::read_to_string(out_dir.path().join("report.json")).unwrap(),
        )
        .unwrap();
        for eval in [&report.train, &report.test] {
            assert!((0.0..=1.0).contains(&eval.acc));
            assert!((0.0..=1.0).contains(&eval.auc));
            assert!((-1.0..=1.0).contains(&eval.mcc));
        }
        assert_eq!(report.model.to_string(), model);
        match model {
            "qsvm" => assert!(report.artifacts.kernel_dump.is_some()),
            _ => assert!(report.artifacts.loss_trace.is_some()),
        }
    }

    finish(
        "pipeline smoke on the bundled peptide sample",
        started,
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_10_runs_are_byte_deterministic() {
    let started = Instant::now();
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample_epitopes.csv");
    let data = data.to_str().unwrap();

    for (model, artifacts) in [
        ("qsvm", vec!["report.json", "qsvm.model", "kernel.txt"]),
        ("vqc", vec!["report.json", "vqc.model", "loss_trace.txt"]),
    ] {
        let out_dir = tempfile::tempdir().unwrap();
        let out = out_dir.path().to_str().unwrap();
        let args = [
            "train", "--model", model, "--data", data, "--shots", "512", "--seed", "21",
            "--epochs", "10", "--out", out,
        ];
        assert!(run_cli(&args).status.success());
        let first: Vec<Vec<u8>> = artifacts
            .iter()
            .map(|f| std::fs::read(out_dir.path().join(f)).unwrap())
            .collect();
        assert!(run_cli(&args).status.success());
        for (file, before) in artifacts.iter().zip(&first) {
            let after = std::fs::read(out_dir.path().join(file)).unwrap();
            assert_eq!(
                &after, before,
                "{model} artifact {file} changed between runs"
            );
        }
    }

    // the kernel command alone is also reproducible
    let out_dir = tempfile::tempdir().unwrap();
    let out = out_dir.path().to_str().unwrap();
    let args = [
        "kernel", "--data", data, "--shots", "1024", "--seed", "4", "--out", out,
    ];
    assert!(run_cli(&args).status.success());
    let before = std::fs::read(out_dir.path().join("kernel.txt")).unwrap();
    assert!(run_cli(&args).status.success());
    let after = std::fs::read(out_dir.path().join("kernel.txt")).unwrap();
    assert_eq!(before, after);

    finish(
        "byte-deterministic artifacts",
        started,
        Duration::from_secs(300),
    );
}
