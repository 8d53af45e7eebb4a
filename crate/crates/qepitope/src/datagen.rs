//! Deterministic generators for the bundled datasets.
//!
//! `examples/generate_datasets.rs` writes these into `data/`; tests assert
//! that the committed files match a fresh regeneration, so the files and
//! this module cannot drift apart.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuits::{AnsatzSpec, EntanglerKind, FeatureMapSpec};
use crate::encode::AMINO_ACIDS;
use crate::error::{Error, Result};
use crate::mode::ShotMode;
use crate::vqc::{forward, VqcModel};

/// Seed for the synthetic peptide sample.
pub const SAMPLE_EPITOPES_SEED: u64 = 11;
/// Seed stream for the separable feature-space set.
pub const SEPARABLE_SEED: u64 = 20_240_501;
/// Seed for the reference labeler's parameters.
pub const REFERENCE_MODEL_SEED: u64 = 3;
/// Minimum decision margin |p_plus - 1/2| the labeler must show on every
/// emitted point.
pub const SEPARABLE_MARGIN: f64 = 0.15;

/// Residues enriched in the positive class of the peptide sample.
const HYDROPHILIC: &str = "DEKNPQRSGH";
/// Residues enriched in the negative class.
const HYDROPHOBIC: &str = "FILMVWYACT";

fn random_sequence(rng: &mut ChaCha8Rng, biased_toward: &str) -> String {
    let len = rng.gen_range(8..=15);
    (0..len)
        .map(|_| {
            // 70% draws from the biased pool, the rest uniform
            let pool = if rng.gen_bool(0.7) {
                biased_toward
            } else {
                AMINO_ACIDS
            };
            let chars: Vec<char> = pool.chars().collect();
            chars[rng.gen_range(0..chars.len())]
        })
        .collect()
}

/// Synthetic peptide CSV: 100 records, labels 1/0, classes drawn from
/// hydrophilic- and hydrophobic-biased residue pools so they overlap but
/// differ in their scale statistics.
pub fn generate_sample_epitopes() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_EPITOPES_SEED);
    let mut rows: Vec<(String, u8)> = Vec::with_capacity(100);
    for _ in 0..50 {
        rows.push((random_sequence(&mut rng, HYDROPHILIC), 1));
        rows.push((random_sequence(&mut rng, HYDROPHOBIC), 0));
    }
    // deterministic interleave-then-shuffle so the file is not sorted by class
    for i in (1..rows.len()).rev() {
        let j = rng.gen_range(0..=i);
        rows.swap(i, j);
    }
    let mut out = String::from(
        "# synthetic peptide sample generated by examples/generate_datasets.rs (seed 11)\nsequence,label\n",
    );
    for (seq, label) in rows {
        out.push_str(&format!("{seq},{label}\n"));
    }
    out
}

/// The hidden labeler: a fixed 2-qubit classifier whose parameters come
/// from a seeded draw. It shares the circuit family of the trained models,
/// so its labels are realizable.
pub fn reference_labeler() -> Result<VqcModel> {
    let feature_map = FeatureMapSpec::new(2, 2)?;
    let ansatz = AnsatzSpec::new(2, 1, EntanglerKind::CzRing)?;
    let mut rng = ChaCha8Rng::seed_from_u64(REFERENCE_MODEL_SEED);
    let theta: Vec<f64> = (0..ansatz.param_count())
        .map(|_| rng.gen_range(-PI..PI))
        .collect();
    VqcModel::new(theta, ansatz, feature_map, 0.0, REFERENCE_MODEL_SEED)
}

/// One labeled point in the 2-dimensional angle-feature space.
#[derive(Clone, Debug, PartialEq)]
pub struct FeaturePoint {
    pub x: Vec<f64>,
    pub label: i8,
}

/// Rejection-sample labeled feature points until each class holds
/// `per_class` members. Every kept point clears the decision margin under
/// the reference labeler.
pub fn generate_separable_points(per_class: usize) -> Result<Vec<FeaturePoint>> {
    let labeler = reference_labeler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEPARABLE_SEED);
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut guard = 0;
    while pos.len() < per_class || neg.len() < per_class {
        guard += 1;
        if guard > 100_000 {
            return Err(Error::Numerical(
                "reference labeler rejected too many candidate points".into(),
            ));
        }
        let x = vec![rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        let p_plus = forward(&labeler, &x, ShotMode::Exact, 0)?.p_plus;
        if (p_plus - 0.5).abs() < SEPARABLE_MARGIN {
            continue;
        }
        let label = if p_plus >= 0.5 { 1 } else { -1 };
        let bucket = if label == 1 { &mut pos } else { &mut neg };
        if bucket.len() < per_class {
            bucket.push(FeaturePoint { x, label });
        }
    }
    // deterministic interleave so neither file is sorted by class
    let mut points = Vec::with_capacity(2 * per_class);
    for (p, n) in pos.into_iter().zip(neg) {
        points.push(p);
        points.push(n);
    }
    for i in (1..points.len()).rev() {
        let j = rng.gen_range(0..=i);
        points.swap(i, j);
    }
    Ok(points)
}

fn points_to_csv(points: &[FeaturePoint]) -> String {
    let mut out = String::from("x0,x1,label\n");
    for p in points {
        out.push_str(&format!("{:.12e},{:.12e},{}\n", p.x[0], p.x[1], p.label));
    }
    out
}

/// The bundled train/test pair: 40 points each, labeled by the hidden
/// reference model with the stated margin.
pub fn generate_separable_split() -> Result<(String, String)> {
    let points = generate_separable_points(40)?;
    let (train, test) = points.split_at(40);
    Ok((points_to_csv(train), points_to_csv(test)))
}

/// Parse a feature-point CSV produced by [`generate_separable_split`].
pub fn parse_feature_csv(text: &str) -> Result<Vec<FeaturePoint>> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || idx == 0 {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected x0,x1,label, found {line:?}"),
            });
        }
        let x0: f64 = fields[0].parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad coordinate {:?}", fields[0]),
        })?;
        let x1: f64 = fields[1].parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad coordinate {:?}", fields[1]),
        })?;
        let label: i8 = fields[2].parse().map_err(|_| Error::Parse {
            line: idx + 1,
            msg: format!("bad label {:?}", fields[2]),
        })?;
        points.push(FeaturePoint {
            x: vec![x0, x1],
            label,
        });
    }
    Ok(points)
}
