//! Independent re-check of a serialized certificate.
//!
//! Everything is recomputed from the wire form of `S`, `x₀`, `T` and `u₀`:
//! the budget, the operator norms (by sign enumeration over the nonzero
//! columns rather than the positive-operator shortcut the solver uses), the
//! distances and the shape of `u₀`. Recorded measurements must agree.

use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use lattice_bpb::bpb::{compute_eta, near_attainment, Ledger, Relation};
use lattice_bpb::{
    operator_norm_general, LatticeVector, Matrix, NormedLattice, PositiveOperator, Rational,
    DEFAULT_N_MAX,
};
use serde_json::Value;

use crate::config::{Command, Mode};
use crate::report::{digest, CertificateRecord};
use crate::wire::{matrix_from_wire, vector_from_wire, WireScalar};

/// Checks a record's certificate. The returned ledger lists every check;
/// malformed records are an error.
pub fn verify_record(rec: &CertificateRecord) -> anyhow::Result<Ledger> {
    match rec.mode {
        Mode::Float => verify_as::<f64>(rec),
        Mode::Rational => verify_as::<Rational>(rec),
    }
}

/// `‖D‖` from the sup-norm domain, using only the nonzero columns of `D`.
/// Exact when at most `n_max` columns remain; otherwise the upper bound
/// `‖|D|·𝟙‖`, which is what a monotone norm allows.
fn distance_norm<S: WireScalar>(d: &Matrix<S>, y: &NormedLattice<S>) -> anyhow::Result<(S, bool)> {
    let cols: Vec<Vec<S>> = (0..d.cols())
        .map(|j| d.column(j))
        .filter(|c| c.iter().any(|v| !v.is_zero()))
        .collect();
    if cols.is_empty() {
        return Ok((S::zero(), true));
    }
    let compact = Matrix::from_columns(&cols)?;
    if cols.len() <= DEFAULT_N_MAX {
        return Ok((operator_norm_general(&compact, y, DEFAULT_N_MAX)?, true));
    }
    let row_sums: Vec<S> = (0..compact.rows())
        .map(|i| (0..compact.cols()).fold(S::zero(), |acc, j| acc + compact.get(i, j).abs()))
        .collect();
    Ok((y.norm_of(&LatticeVector::new(row_sums)?), false))
}

fn verify_as<S: WireScalar + FromStr>(rec: &CertificateRecord) -> anyhow::Result<Ledger> {
    let cert = rec.certificate().context("record carries no certificate")?;
    let y = rec.norm.lattice::<S>(rec.m)?;
    let tol = S::default_tol();
    let one = S::one();
    let s = matrix_from_wire::<S>(&rec.s)?;
    let t = matrix_from_wire::<S>(&cert.t)?;
    let x0 = vector_from_wire::<S>(&rec.x0)?;
    let u0 = vector_from_wire::<S>(&cert.u0)?;
    for (what, rows, cols) in [("S", s.rows(), s.cols()), ("T", t.rows(), t.cols())] {
        if rows != rec.m || cols != rec.n {
            bail!("{what} is {rows}x{cols}, expected {}x{}", rec.m, rec.n);
        }
    }
    if x0.dim() != rec.n || u0.dim() != rec.n {
        bail!("points must have dimension {}", rec.n);
    }

    let mut l = Ledger::new();
    l.record_bool("input_digest", digest(&rec.inputs()) == rec.input_digest);
    let modulus = y
        .norm()
        .analytic_modulus()
        .context("codomain has no modulus")?;
    let budget = compute_eta(rec.epsilon, &modulus)?;
    l.record_bool(
        "budget",
        budget.eta_internal == rec.eta_internal && budget.eta_definition == rec.eta_definition,
    );
    let eps = S::lift(rec.epsilon);
    let eta = S::lift(rec.eta_internal);

    let s = PositiveOperator::new(s, y.clone()).context("S is not positive")?;
    let positive = t.is_nonnegative();
    l.record_bool("target_positive", positive);
    if !positive {
        return Ok(l);
    }
    if let (Command::BpbC0, Some(len)) = (rec.command, rec.active_len) {
        let tail_zero = (len..rec.n).all(|j| t.column(j).iter().all(|v| v.is_zero()));
        l.record_bool("finite_support", tail_zero);
    }

    let (norm_t, _) = distance_norm(&t, &y)?;
    let t = PositiveOperator::new(t, y.clone())?;
    l.record("unit_norm", &norm_t, Relation::Eq, &one, &tol);
    let norm_tu0 = t.norm_at(&u0);
    l.record("attains_norm", &norm_tu0, Relation::Eq, &norm_t, &tol);
    l.record("unit_point", &u0.sup_norm(), Relation::Eq, &one, &tol);

    let norm_s = s.norm_at(&LatticeVector::ones(rec.n));
    if norm_s.is_zero() {
        bail!("S is zero");
    }
    let scaled = if norm_s == one {
        s.matrix().clone()
    } else {
        s.matrix().scale(&(one.clone() / norm_s))
    };
    let (dist_ops, exact) = distance_norm(&t.matrix().sub(&scaled)?, &y)?;
    l.record(
        "operator_distance",
        &dist_ops,
        Relation::Lt,
        &eps,
        &S::zero(),
    );
    let dist_points = u0.sub(&x0)?.sup_norm();
    l.record("point_distance", &dist_points, Relation::Le, &eta, &tol);
    l.record("eta_below_epsilon", &eta, Relation::Lt, &eps, &S::zero());

    let low = -one.clone() + eta.clone();
    let high = one.clone() - eta;
    let shaped = x0.entries().iter().zip(u0.entries()).all(|(x, u)| {
        if *x < low {
            *u == -one.clone()
        } else if *x > high {
            *u == one
        } else {
            u == x
        }
    });
    l.record_bool("point_shape", shaped);
    l.record_bool(
        "precondition_flag",
        Some(near_attainment(&s, &x0, &budget)?) == rec.precond_met,
    );

    let recorded = |v: &Value| S::from_wire(v);
    l.record(
        "recorded_norm_t",
        &recorded(&cert.norm_t)?,
        Relation::Eq,
        &norm_t,
        &tol,
    );
    l.record(
        "recorded_norm_tu0",
        &recorded(&cert.norm_tu0)?,
        Relation::Eq,
        &norm_tu0,
        &tol,
    );
    l.record(
        "recorded_dist_points",
        &recorded(&cert.dist_points)?,
        Relation::Eq,
        &dist_points,
        &tol,
    );
    if exact && cert.dist_ops_exact {
        l.record(
            "recorded_dist_ops",
            &recorded(&cert.dist_ops)?,
            Relation::Eq,
            &dist_ops,
            &tol,
        );
    }
    Ok(l)
}

/// Reads a JSON report (or a single record) and verifies every record that
/// carries a certificate. Returns `(instance_id, ledger)` pairs.
pub fn verify_file(path: &Path) -> anyhow::Result<Vec<(usize, Ledger)>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let records: Vec<CertificateRecord> = match doc.get("records") {
        Some(r) => serde_json::from_value(r.clone()).context("reading records")?,
        None => vec![serde_json::from_value(doc).context("reading certificate record")?],
    };
    records
        .iter()
        .filter(|r| r.certificate().is_some())
        .map(|r| Ok((r.instance_id, verify_record(r)?)))
        .collect()
}
