//! Peptide ingestion and angle-feature encoding.
//!
//! Each record is a peptide sequence over the 20 canonical amino acids with
//! a binary label. Features are whole-sequence means of per-residue
//! propensity scales, standardized on the training split, clipped to three
//! standard deviations, and mapped linearly onto [-pi, pi] so they can feed
//! rotation angles directly.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const AMINO_ACIDS: &str = "ACDEFGHIKLMNPQRSTVWY";

/// Index of a residue letter in the canonical ordering, or None.
pub fn residue_index(c: char) -> Option<usize> {
    AMINO_ACIDS.find(c)
}

/// A named per-residue propensity table, indexed by [`residue_index`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scale {
    pub name: &'static str,
    pub values: [f64; 20],
}

/// Parker-Guo-Hodges hydrophilicity.
pub const PARKER_HYDROPHILICITY: Scale = Scale {
    name: "parker_hydrophilicity",
    values: [
        2.1,   // A
        1.4,   // C
        10.0,  // D
        7.8,   // E
        -9.2,  // F
        5.7,   // G
        2.1,   // H
        -8.0,  // I
        5.7,   // K
        -9.2,  // L
        -4.2,  // M
        7.0,   // N
        2.1,   // P
        6.0,   // Q
        4.2,   // R
        6.5,   // S
        5.2,   // T
        -3.7,  // V
        -10.0, // W
        -1.9,  // Y
    ],
};

/// Kyte-Doolittle hydropathy.
pub const KYTE_DOOLITTLE: Scale = Scale {
    name: "kyte_doolittle",
    values: [
        1.8,  // A
        2.5,  // C
        -3.5, // D
        -3.5, // E
        2.8,  // F
        -0.4, // G
        -3.2, // H
        4.5,  // I
        -3.9, // K
        3.8,  // L
        1.9,  // M
        -3.5, // N
        -1.6, // P
        -3.5, // Q
        -4.5, // R
        -0.8, // S
        -0.7, // T
        4.2,  // V
        -0.9, // W
        -1.3, // Y
    ],
};

/// Emini surface accessibility.
pub const EMINI_ACCESSIBILITY: Scale = Scale {
    name: "emini_accessibility",
    values: [
        0.815, // A
        0.394, // C
        1.283, // D
        1.445, // E
        0.695, // F
        0.714, // G
        1.180, // H
        0.603, // I
        1.545, // K
        0.603, // L
        0.714, // M
        1.296, // N
        1.236, // P
        1.348, // Q
        1.475, // R
        1.115, // S
        1.184, // T
        0.606, // V
        0.808, // W
        0.689, // Y
    ],
};

/// Look a bundled scale up by name.
pub fn scale_by_name(name: &str) -> Option<Scale> {
    [PARKER_HYDROPHILICITY, KYTE_DOOLITTLE, EMINI_ACCESSIBILITY]
        .into_iter()
        .find(|s| s.name == name)
}

/// One labeled peptide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeptideRecord {
    pub sequence: String,
    /// +1 epitope, -1 non-epitope.
    pub label: i8,
}

impl PeptideRecord {
    pub fn new(sequence: &str, label: i8) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::Validation("empty peptide sequence".into()));
        }
        if let Some(bad) = sequence.chars().find(|&c| residue_index(c).is_none()) {
            return Err(Error::Validation(format!(
                "invalid residue {bad:?} in sequence {sequence:?}"
            )));
        }
        if label != 1 && label != -1 {
            return Err(Error::Validation(format!(
                "label must be +1 or -1, got {label}"
            )));
        }
        Ok(PeptideRecord {
            sequence: sequence.to_string(),
            label,
        })
    }
}

/// An ordered collection of records.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub records: Vec<PeptideRecord>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<i8> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.records.iter().filter(|r| r.label == 1).count();
        (pos, self.records.len() - pos)
    }
}

/// Featurization parameters: which scales to use and, once fitted, the
/// per-scale standardization statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodingSpec {
    pub scales: Vec<Scale>,
    /// Per-scale (mean, std) fitted on training data.
    pub normalization: Option<Vec<(f64, f64)>>,
}

impl EncodingSpec {
    /// Bundled scale sets: two features (Parker hydrophilicity plus
    /// Kyte-Doolittle hydropathy) or three (adding Emini accessibility).
    pub fn for_features(n_features: usize) -> Result<Self> {
        let scales = match n_features {
            2 => vec![PARKER_HYDROPHILICITY, KYTE_DOOLITTLE],
            3 => vec![PARKER_HYDROPHILICITY, KYTE_DOOLITTLE, EMINI_ACCESSIBILITY],
            other => {
                return Err(Error::Config(format!(
                    "{other} feature scales requested; 2 or 3 are bundled"
                )))
            }
        };
        Ok(EncodingSpec {
            scales,
            normalization: None,
        })
    }

    pub fn from_scale_names(names: &[&str]) -> Result<Self> {
        let scales = names
            .iter()
            .map(|n| {
                scale_by_name(n).ok_or_else(|| Error::Validation(format!("unknown scale {n:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if scales.is_empty() {
            return Err(Error::Config("encoding needs at least one scale".into()));
        }
        Ok(EncodingSpec {
            scales,
            normalization: None,
        })
    }

    pub fn n_features(&self) -> usize {
        self.scales.len()
    }

    pub fn is_fitted(&self) -> bool {
        self.normalization.is_some()
    }

    /// Unstandardized features: the mean scale value over the sequence.
    pub fn raw_features(&self, sequence: &str) -> Vec<f64> {
        let len = sequence.chars().count().max(1) as f64;
        self.scales
            .iter()
            .map(|scale| {
                sequence
                    .chars()
                    .filter_map(residue_index)
                    .map(|i| scale.values[i])
                    .sum::<f64>()
                    / len
            })
            .collect()
    }
}

/// Parse CSV text with a `sequence,label` header. Labels 1, -1 and 0 are
/// accepted, with 0 canonicalized to -1. Lines starting with `#` are
/// ignored. Malformed rows are rejected with their line number.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut records = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            let normalized: String = line.chars().filter(|c| !c.is_whitespace()).collect();
            if !normalized.eq_ignore_ascii_case("sequence,label") {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected header \"sequence,label\", found {line:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let sequence = fields.next().unwrap_or("").trim();
        let label_text = fields.next().unwrap_or("").trim();
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                msg: "too many fields".into(),
            });
        }
        let label = match label_text {
            "1" | "+1" => 1,
            "-1" | "0" => -1,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("invalid label {other:?}"),
                })
            }
        };
        let record = PeptideRecord::new(sequence, label).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        records.push(record);
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            msg: "missing \"sequence,label\" header".into(),
        });
    }
    Ok(Dataset { records })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text)
}

/// Fit per-scale standardization statistics (population convention) on the
/// training set. The standard deviation is floored at 1e-9.
pub fn fit_normalization(train: &Dataset, spec: &EncodingSpec) -> Result<EncodingSpec> {
    if train.len() < 2 {
        return Err(Error::Size(format!(
            "normalization needs at least 2 records, got {}",
            train.len()
        )));
    }
    let t = train.len() as f64;
    let raws: Vec<Vec<f64>> = train
        .records
        .iter()
        .map(|r| spec.raw_features(&r.sequence))
        .collect();
    let normalization = (0..spec.n_features())
        .map(|s| {
            let mean = raws.iter().map(|r| r[s]).sum::<f64>() / t;
            let var = raws.iter().map(|r| (r[s] - mean).powi(2)).sum::<f64>() / t;
            (mean, var.sqrt().max(1e-9))
        })
        .collect();
    Ok(EncodingSpec {
        scales: spec.scales.clone(),
        normalization: Some(normalization),
    })
}

/// Standardize, clip to three standard deviations, and map onto [-pi, pi].
pub fn featurize(record: &PeptideRecord, spec: &EncodingSpec) -> Result<Vec<f64>> {
    let norms = spec
        .normalization
        .as_ref()
        .ok_or_else(|| Error::State("encoding spec is not fitted".into()))?;
    Ok(spec
        .raw_features(&record.sequence)
        .iter()
        .zip(norms)
        .map(|(raw, &(mean, std))| {
            let z = ((raw - mean) / std).clamp(-3.0, 3.0);
            (z / 3.0) * PI
        })
        .collect())
}

/// Featurize a whole dataset, returning the vectors and labels.
pub fn encode_all(data: &Dataset, spec: &EncodingSpec) -> Result<(Vec<Vec<f64>>, Vec<i8>)> {
    let xs = data
        .records
        .iter()
        .map(|r| featurize(r, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok((xs, data.labels()))
}

/// Seeded train/test split. Test size is `round(t * fraction)`; stratified
/// mode applies that rule per class, which keeps proportions within one
/// record. Output subsets preserve the original record order.
pub fn split(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if data.len() < 4 {
        return Err(Error::Size(format!(
            "split needs at least 4 records, got {}",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx: Vec<usize> = Vec::new();
    if stratified {
        let (pos, neg) = data.class_counts();
        if pos == 0 || neg == 0 {
            return Err(Error::Degenerate(
                "stratified split requires both classes".into(),
            ));
        }
        for class in [1i8, -1] {
            let mut idx: Vec<usize> = (0..data.len())
                .filter(|&i| data.records[i].label == class)
                .collect();
            idx.shuffle(&mut rng);
            let take = (idx.len() as f64 * test_fraction).round() as usize;
            test_idx.extend(idx.into_iter().take(take));
        }
    } else {
        let mut idx: Vec<usize> = (0..data.len()).collect();
        idx.shuffle(&mut rng);
        let take = (data.len() as f64 * test_fraction).round() as usize;
        test_idx.extend(idx.into_iter().take(take));
    }
    test_idx.sort_unstable();
    let in_test: Vec<bool> = {
        let mut v = vec![false; data.len()];
        for &i in &test_idx {
            v[i] = true;
        }
        v
    };
    let train = Dataset {
        records: (0..data.len())
            .filter(|&i| !in_test[i])
            .map(|i| data.records[i].clone())
            .collect(),
    };
    let test = Dataset {
        records: test_idx.iter().map(|&i| data.records[i].clone()).collect(),
    };
    Ok((train, test))
}
