//! Flat key-value text persistence for trained models.
//!
//! Files are `key = value` lines; list values are space-separated. All
//! floats are written with 12 significant digits in scientific notation so
//! repeated saves are byte-identical.

use std::collections::BTreeMap;

use crate::circuits::{AnsatzSpec, EntanglerKind, FeatureMapSpec};
use crate::encode::EncodingSpec;
use crate::error::{Error, Result};
use crate::mode::ShotMode;

pub fn fmt_f64(v: f64) -> String {
    // 12 significant digits
    format!("{v:.11e}")
}

pub fn fmt_f64_list(vs: &[f64]) -> String {
    vs.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ")
}

pub struct KvMap(BTreeMap<String, String>);

pub fn parse_kv(text: &str) -> Result<KvMap> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            msg: format!("expected key = value, found {line:?}"),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(KvMap(map))
}

impl KvMap {
    pub fn get(&self, key: &str) -> Result<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::Validation(format!("model file is missing key {key:?}")))
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        self.get(key)?
            .parse()
            .map_err(|_| Error::Validation(format!("key {key:?} is not an integer")))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        self.get(key)?
            .parse()
            .map_err(|_| Error::Validation(format!("key {key:?} is not an integer")))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        self.get(key)?
            .parse()
            .map_err(|_| Error::Validation(format!("key {key:?} is not a number")))
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get(key)?
            .split_whitespace()
            .map(|f| {
                f.parse()
                    .map_err(|_| Error::Validation(format!("key {key:?} holds a bad number {f:?}")))
            })
            .collect()
    }

    pub fn get_i8_list(&self, key: &str) -> Result<Vec<i8>> {
        self.get(key)?
            .split_whitespace()
            .map(|f| {
                f.parse()
                    .map_err(|_| Error::Validation(format!("key {key:?} holds a bad label {f:?}")))
            })
            .collect()
    }
}

pub fn write_feature_map(out: &mut String, spec: &FeatureMapSpec) {
    out.push_str(&format!("n_qubits = {}\n", spec.n_qubits));
    out.push_str(&format!("feature_map_depth = {}\n", spec.depth));
    let pairs: Vec<String> = spec
        .entangling_pairs
        .iter()
        .map(|(a, b)| format!("{a}:{b}"))
        .collect();
    out.push_str(&format!("feature_map_pairs = {}\n", pairs.join(" ")));
}

pub fn read_feature_map(kv: &KvMap) -> Result<FeatureMapSpec> {
    let n_qubits = kv.get_usize("n_qubits")?;
    let depth = kv.get_usize("feature_map_depth")?;
    let pairs = kv
        .get("feature_map_pairs")?
        .split_whitespace()
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| Error::Validation(format!("bad entangling pair {p:?}")))?;
            Ok((
                a.parse()
                    .map_err(|_| Error::Validation(format!("bad pair index {a:?}")))?,
                b.parse()
                    .map_err(|_| Error::Validation(format!("bad pair index {b:?}")))?,
            ))
        })
        .collect::<Result<Vec<(usize, usize)>>>()?;
    FeatureMapSpec::new(n_qubits, depth)?.with_pairs(pairs)
}

pub fn write_encoding(out: &mut String, spec: &EncodingSpec) -> Result<()> {
    let names: Vec<&str> = spec.scales.iter().map(|s| s.name).collect();
    out.push_str(&format!("encoding_scales = {}\n", names.join(" ")));
    let norms = spec
        .normalization
        .as_ref()
        .ok_or_else(|| Error::State("cannot persist an unfitted encoding".into()))?;
    let means: Vec<f64> = norms.iter().map(|&(m, _)| m).collect();
    let stds: Vec<f64> = norms.iter().map(|&(_, s)| s).collect();
    out.push_str(&format!("encoding_mean = {}\n", fmt_f64_list(&means)));
    out.push_str(&format!("encoding_std = {}\n", fmt_f64_list(&stds)));
    Ok(())
}

pub fn read_encoding(kv: &KvMap) -> Result<EncodingSpec> {
    let names: Vec<&str> = kv.get("encoding_scales")?.split_whitespace().collect();
    let spec = EncodingSpec::from_scale_names(&names)?;
    let means = kv.get_f64_list("encoding_mean")?;
    let stds = kv.get_f64_list("encoding_std")?;
    if means.len() != spec.n_features() || stds.len() != spec.n_features() {
        return Err(Error::Validation(
            "encoding statistics do not match the scale list".into(),
        ));
    }
    Ok(EncodingSpec {
        scales: spec.scales,
        normalization: Some(means.into_iter().zip(stds).collect()),
    })
}

pub fn write_ansatz(out: &mut String, spec: &AnsatzSpec) {
    out.push_str(&format!("ansatz_layers = {}\n", spec.layers));
    out.push_str(&format!("entangler = {}\n", spec.entangler));
}

pub fn read_ansatz(kv: &KvMap, n_qubits: usize) -> Result<AnsatzSpec> {
    let layers = kv.get_usize("ansatz_layers")?;
    let entangler: EntanglerKind = kv.get("entangler")?.parse()?;
    AnsatzSpec::new(n_qubits, layers, entangler)
}

pub fn write_mode(out: &mut String, key: &str, mode: ShotMode) {
    out.push_str(&format!("{key} = {mode}\n"));
}

pub fn read_mode(kv: &KvMap, key: &str) -> Result<ShotMode> {
    kv.get(key)?.parse()
}
