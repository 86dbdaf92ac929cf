//! Report rows and their CSV / JSON encodings.
//!
//! CSV columns for `bpb-linfty` and `bpb-c0`, in order:
//! `instance_id, n, m, norm_family, epsilon, eta_internal, eta_definition,
//! precond_met, dist_ops, dist_points, norm_T, norm_Tu0, ledger_ok, micros`.
//! Fields without a value (no certificate, or timing disabled) are empty.
//! Exact values are written to CSV as their nearest `f64`; the JSON keeps them
//! as `[numerator, denominator]` pairs.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use lattice_bpb::bpb::{Ledger, Partition};
use lattice_bpb::converse::ConverseRow;
use lattice_bpb::monotonicity::ModulusEstimate;
use lattice_bpb::{Rational, Scalar};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::{Command, Mode, NormSpec};
use crate::wire::WireScalar;

pub const BPB_COLUMNS: [&str; 14] = [
    "instance_id",
    "n",
    "m",
    "norm_family",
    "epsilon",
    "eta_internal",
    "eta_definition",
    "precond_met",
    "dist_ops",
    "dist_points",
    "norm_T",
    "norm_Tu0",
    "ledger_ok",
    "micros",
];

/// Hex SHA-256 of the compact JSON encoding of `inputs`.
pub fn digest(inputs: &Value) -> String {
    let bytes = serde_json::to_vec(inputs).expect("JSON values serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Everything the solver produced, in wire form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateBody {
    pub t: Value,
    pub u0: Value,
    pub h1: Value,
    pub h2: Value,
    /// `1/‖S‖`; the distance is measured against `scale·S`.
    pub scale: Value,
    pub partition: Partition,
    pub norm_t: Value,
    pub norm_tu0: Value,
    pub dist_ops: Value,
    pub dist_ops_exact: bool,
    pub dist_points: Value,
    pub ledger_ok: bool,
    pub ledger: Ledger,
    /// Result of the independent re-check of the serialized certificate.
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verify_failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Certificate(Box<CertificateBody>),
    Failed { kind: String, message: String },
}

/// One `bpb-linfty` / `bpb-c0` instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub instance_id: usize,
    pub input_digest: String,
    pub command: Command,
    pub mode: Mode,
    pub norm: NormSpec,
    pub n: usize,
    pub m: usize,
    pub epsilon: f64,
    pub eta_internal: f64,
    pub eta_definition: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_len: Option<usize>,
    pub s: Value,
    pub x0: Value,
    /// `None` when the inputs could not be evaluated at all.
    pub precond_met: Option<bool>,
    pub outcome: Outcome,
}

impl CertificateRecord {
    pub fn certificate(&self) -> Option<&CertificateBody> {
        match &self.outcome {
            Outcome::Certificate(c) => Some(c),
            Outcome::Failed { .. } => None,
        }
    }

    /// Precondition met, ledger clean and independently verified.
    pub fn success(&self) -> bool {
        self.precond_met == Some(true)
            && self
                .certificate()
                .is_some_and(|c| c.ledger_ok && c.verified)
    }

    /// The precondition held but the run did not produce a clean certificate.
    pub fn violation(&self) -> bool {
        self.precond_met == Some(true) && !self.success()
    }

    /// The canonical inputs hashed into `input_digest`.
    pub fn inputs(&self) -> Value {
        serde_json::json!({
            "command": self.command,
            "mode": self.mode,
            "norm": self.norm,
            "epsilon": self.epsilon,
            "active_len": self.active_len,
            "s": self.s,
            "x0": self.x0,
        })
    }
}

/// Nearest `f64` of a wire scalar, for summaries and CSV.
pub fn approx(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::Array(_) => Rational::from_wire(v).ok().map(|q| q.approx()),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: usize,
    pub precond_met: usize,
    pub certificates: usize,
    pub successes: usize,
    pub violations: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dist_ops: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_dist_ops: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dist_points: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpbReport {
    pub experiment: String,
    pub command: Command,
    pub seed: u64,
    pub mode: Mode,
    pub records: Vec<CertificateRecord>,
    pub summary: Summary,
    /// Wall time per record in microseconds; never serialized to JSON.
    #[serde(skip)]
    pub micros: Vec<Option<u128>>,
}

impl BpbReport {
    pub fn summarize(records: &[CertificateRecord]) -> Summary {
        let mut s = Summary {
            rows: records.len(),
            ..Summary::default()
        };
        let mut dists = Vec::new();
        let mut points = Vec::new();
        for r in records {
            s.precond_met += usize::from(r.precond_met == Some(true));
            s.successes += usize::from(r.success());
            s.violations += usize::from(r.violation());
            match r.certificate() {
                Some(c) => {
                    s.certificates += 1;
                    if r.success() {
                        dists.extend(approx(&c.dist_ops));
                        points.extend(approx(&c.dist_points));
                    }
                }
                None => s.failed += 1,
            }
        }
        if !dists.is_empty() {
            s.max_dist_ops = dists.iter().cloned().reduce(f64::max);
            s.mean_dist_ops = Some(dists.iter().sum::<f64>() / dists.len() as f64);
            s.max_dist_points = points.iter().cloned().reduce(f64::max);
        }
        s
    }

    pub fn write_csv<W: Write>(&self, out: W) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(BPB_COLUMNS)?;
        for (k, r) in self.records.iter().enumerate() {
            let cert = r.certificate();
            let num = |f: fn(&CertificateBody) -> &Value| {
                cert.and_then(|c| approx(f(c)))
                    .map(fmt_f64)
                    .unwrap_or_default()
            };
            let micros = self
                .micros
                .get(k)
                .copied()
                .flatten()
                .map(|m| m.to_string())
                .unwrap_or_default();
            w.write_record([
                r.instance_id.to_string(),
                r.n.to_string(),
                r.m.to_string(),
                family_name(&r.norm),
                fmt_f64(r.epsilon),
                fmt_f64(r.eta_internal),
                fmt_f64(r.eta_definition),
                r.precond_met.map(|b| b.to_string()).unwrap_or_default(),
                num(|c| &c.dist_ops),
                num(|c| &c.dist_points),
                num(|c| &c.norm_t),
                num(|c| &c.norm_tu0),
                cert.map(|c| c.ledger_ok.to_string()).unwrap_or_default(),
                micros,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn family_name(norm: &NormSpec) -> String {
    match norm.family {
        crate::config::Family::L1 => "l1".into(),
        crate::config::Family::Lp => format!("l{}", norm.p.unwrap_or(f64::NAN)),
        crate::config::Family::WeightedL1 => "weighted_l1".into(),
        crate::config::Family::Sup => "sup".into(),
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub const CONVERSE_COLUMNS: [&str; 19] = [
    "instance_id",
    "dim_m",
    "dim_n",
    "m",
    "norm_family",
    "u_norm",
    "epsilon",
    "eta_definition",
    "precond_met",
    "s_m0_norm",
    "dist_ops",
    "dist_points",
    "tn0_max",
    "bound_holds",
    "within_epsilon",
    "m_attains",
    "ledger_ok",
    "best_alternative",
    "micros",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseRecord {
    pub instance_id: usize,
    pub input_digest: String,
    pub dim_m: usize,
    pub dim_n: usize,
    pub m: usize,
    pub norm: NormSpec,
    pub target_u_norm: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub m0: Vec<f64>,
    pub n0: Vec<f64>,
    pub outcome: ConverseOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConverseOutcome {
    Measured { row: ConverseRow, passes: bool },
    Failed { kind: String, message: String },
}

impl ConverseRecord {
    pub fn row(&self) -> Option<&ConverseRow> {
        match &self.outcome {
            ConverseOutcome::Measured { row, .. } => Some(row),
            ConverseOutcome::Failed { .. } => None,
        }
    }

    /// A measured row that contradicts the lower bound, a run that failed,
    /// or a ledger failure on a row whose precondition held.
    pub fn violation(&self) -> bool {
        match self.row() {
            Some(r) => !r.passes() || (r.precond_met && !r.ledger_ok),
            None => true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConverseSummary {
    pub rows: usize,
    pub violations: usize,
    pub precond_met: usize,
    pub min_gap: Option<f64>,
    pub max_tn0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseReport {
    pub experiment: String,
    pub seed: u64,
    pub records: Vec<ConverseRecord>,
    pub summary: ConverseSummary,
    #[serde(skip)]
    pub micros: Vec<Option<u128>>,
}

impl ConverseReport {
    pub fn summarize(records: &[ConverseRecord]) -> ConverseSummary {
        let rows: Vec<&ConverseRow> = records.iter().filter_map(ConverseRecord::row).collect();
        ConverseSummary {
            rows: records.len(),
            violations: records.iter().filter(|r| r.violation()).count(),
            precond_met: rows.iter().filter(|r| r.precond_met).count(),
            // dist_ops − ‖u‖, which the lower bound says is ≥ 0
            min_gap: rows.iter().map(|r| r.dist_ops - r.u_norm).reduce(f64::min),
            max_tn0: rows.iter().map(|r| r.tn0_max).reduce(f64::max),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CONVERSE_COLUMNS)?;
        for (k, rec) in self.records.iter().enumerate() {
            let r = rec.row();
            let f = |g: fn(&ConverseRow) -> f64| fmt_opt(r.map(g));
            let b = |g: fn(&ConverseRow) -> bool| r.map(|r| g(r).to_string()).unwrap_or_default();
            w.write_record([
                rec.instance_id.to_string(),
                rec.dim_m.to_string(),
                rec.dim_n.to_string(),
                rec.m.to_string(),
                family_name(&rec.norm),
                f(|r| r.u_norm),
                f(|r| r.epsilon),
                f(|r| r.eta_definition),
                b(|r| r.precond_met),
                f(|r| r.s_m0_norm),
                f(|r| r.dist_ops),
                f(|r| r.dist_points),
                f(|r| r.tn0_max),
                b(|r| r.bound_holds),
                b(|r| r.within_epsilon),
                b(|r| r.m_attains),
                b(|r| r.ledger_ok),
                fmt_opt(r.and_then(|r| r.best_alternative)),
                self.micros
                    .get(k)
                    .copied()
                    .flatten()
                    .map(|m| m.to_string())
                    .unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub const MODULUS_COLUMNS: [&str; 8] = [
    "n",
    "norm_family",
    "epsilon",
    "min_sum_norm",
    "delta_hat",
    "uniformly_monotone",
    "analytic_delta",
    "numeric_delta",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusPoint {
    #[serde(flatten)]
    pub estimate: ModulusEstimate,
    pub analytic_delta: Option<f64>,
    pub analytic_eta: Option<f64>,
    /// The monotone step function built from all estimates, at this `ε`.
    pub numeric_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRow {
    pub modulus: String,
    pub form: String,
    pub samples: usize,
    pub violation_count: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusReport {
    pub experiment: String,
    pub n: usize,
    pub norm: NormSpec,
    pub seed: u64,
    pub points: Vec<ModulusPoint>,
    pub validations: Vec<ValidationRow>,
    pub violations: usize,
}

impl ModulusReport {
    pub fn write_csv<W: Write>(&self, out: W) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(MODULUS_COLUMNS)?;
        for p in &self.points {
            w.write_record([
                self.n.to_string(),
                family_name(&self.norm),
                fmt_f64(p.estimate.epsilon),
                fmt_f64(p.estimate.min_sum_norm),
                fmt_f64(p.estimate.delta_hat),
                p.estimate.uniformly_monotone.to_string(),
                fmt_opt(p.analytic_delta),
                fmt_f64(p.numeric_delta),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Any of the three report kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Bpb(BpbReport),
    Converse(ConverseReport),
    Modulus(ModulusReport),
}

impl Report {
    pub fn violations(&self) -> usize {
        match self {
            Report::Bpb(r) => r.summary.violations,
            Report::Converse(r) => r.summary.violations,
            Report::Modulus(r) => r.violations,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Report::Bpb(r) => r.records.len(),
            Report::Converse(r) => r.records.len(),
            Report::Modulus(r) => r.points.len(),
        }
    }

    pub fn to_json(&self) -> anyhow::Result<String> {
        let mut s = match self {
            Report::Bpb(r) => serde_json::to_string_pretty(r)?,
            Report::Converse(r) => serde_json::to_string_pretty(r)?,
            Report::Modulus(r) => serde_json::to_string_pretty(r)?,
        };
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> anyhow::Result<Vec<u8>> {
        let mut buf = Vec::new();
        match self {
            Report::Bpb(r) => r.write_csv(&mut buf)?,
            Report::Converse(r) => r.write_csv(&mut buf)?,
            Report::Modulus(r) => r.write_csv(&mut buf)?,
        }
        Ok(buf)
    }

    /// Writes `<stem>.csv` and `<stem>.json` under `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> anyhow::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        std::fs::write(&csv_path, self.to_csv()?)
            .with_context(|| format!("writing {}", csv_path.display()))?;
        std::fs::write(&json_path, self.to_json()?)
            .with_context(|| format!("writing {}", json_path.display()))?;
        Ok(vec![csv_path, json_path])
    }
}
