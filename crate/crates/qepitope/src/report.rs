//! Run reports: configuration echo, metrics, artifact paths, and the
//! published comparison rows rendered beside new results.

use serde::{Deserialize, Serialize};

use crate::circuits::EntanglerKind;
use crate::error::Error;
use crate::metrics::{EvalReport, ModelKind};
use crate::mode::ShotMode;

/// Box bound for the dual solver; serialized as a string so that an
/// unbounded margin ("inf") survives JSON.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BoxBound(pub f64);

impl std::fmt::Display for BoxBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl std::str::FromStr for BoxBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(BoxBound(f64::INFINITY));
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("invalid box bound {s:?}")))?;
        if v <= 0.0 {
            return Err(Error::Config("box bound must be positive".into()));
        }
        Ok(BoxBound(v))
    }
}

impl TryFrom<String> for BoxBound {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<BoxBound> for String {
    fn from(b: BoxBound) -> String {
        b.to_string()
    }
}

/// Effective configuration of one run, echoed verbatim into its report so
/// the run is reproducible from the report alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: String,
    pub model: ModelKind,
    pub qubits: usize,
    pub depth: usize,
    pub entangler: EntanglerKind,
    pub shots: ShotMode,
    pub c: BoxBound,
    pub tol: f64,
    pub lr: f64,
    pub epochs: usize,
    pub test_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
    pub out: String,
}

/// File names of the artifacts a run wrote, relative to its output dir.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifacts {
    pub model_file: String,
    pub kernel_dump: Option<String>,
    pub loss_trace: Option<String>,
}

/// One published comparison row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub method: String,
    pub year: u16,
    pub acc: String,
    pub auc: String,
    pub mcc: String,
}

fn row(method: &str, year: u16, acc: &str, auc: &str, mcc: &str) -> ReferenceRow {
    ReferenceRow {
        method: method.into(),
        year,
        acc: acc.into(),
        auc: auc.into(),
        mcc: mcc.into(),
    }
}

/// Published figures for well-known epitope predictors, plus the reported
/// quantum classifier rows. Display-only context, never test targets.
pub fn reference_rows() -> Vec<ReferenceRow> {
    vec![
        row("ABCpred", 2005, "66%", "0.72", "0.2"),
        row("RNN continuous-epitope model", 2006, "65%", "0.64", "-"),
        row("Improved linear-epitope method", 2006, "65%", "0.70", "-"),
        row("PEPITO", 2008, "70%", "0.75", "-"),
        row("SVMTriP", 2012, "70-75%", "0.74", "0.4"),
        row("BepiPred-2.0", 2017, "68-72%", "0.74", "-"),
        row(
            "CLI tool review consensus",
            2021,
            "65-70%",
            "0.68-0.72",
            "0.3-0.4",
        ),
        row(
            "Structure-based local/global model",
            2022,
            "75%",
            "0.76",
            "0.45",
        ),
        row("Graph attention network", 2024, "78%", "0.8", "0.5"),
        row("QSVM (reported)", 2025, "70%", "0.71", "0.42"),
        row("VQC (reported)", 2025, "73%", "0.703", "0.148"),
    ]
}

/// The two quantum rows embedded in every run report for side-by-side
/// display.
pub fn quantum_reference_rows() -> Vec<ReferenceRow> {
    reference_rows()
        .into_iter()
        .filter(|r| r.method.starts_with("QSVM") || r.method.starts_with("VQC"))
        .collect()
}

/// Everything a `train` run persists. Wall-clock timing is printed to the
/// console instead of stored here, so identical configurations produce
/// byte-identical report files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: ModelKind,
    pub config: RunConfig,
    pub train: EvalReport,
    pub test: EvalReport,
    pub artifacts: Artifacts,
    pub convergence_warning: bool,
    pub reference: Vec<ReferenceRow>,
}

/// Output of `eval`: metrics of a persisted model on a given dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRunReport {
    pub model: ModelKind,
    pub model_file: String,
    pub data: String,
    pub eval: EvalReport,
    pub reference: Vec<ReferenceRow>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

impl EvalRunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}

/// Render a comparison table from run rows plus the reference table.
pub fn render_comparison(runs: &[(String, &RunReport)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<42} {:>6} {:>9} {:>9} {:>9}\n",
        "method", "year", "ACC", "AUC", "MCC"
    ));
    for (name, report) in runs {
        out.push_str(&format!(
            "{:<42} {:>6} {:>9} {:>9} {:>9}\n",
            format!("{} (run {})", report.model, name),
            "-",
            format!("{:.4}", report.test.acc),
            format!("{:.4}", report.test.auc),
            format!("{:+.4}", report.test.mcc),
        ));
    }
    for r in reference_rows() {
        out.push_str(&format!(
            "{:<42} {:>6} {:>9} {:>9} {:>9}\n",
            r.method, r.year, r.acc, r.auc, r.mcc
        ));
    }
    out
}
