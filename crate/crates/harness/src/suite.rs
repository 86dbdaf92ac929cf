//! Instance generation and batch execution.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use lattice_bpb::bpb::{near_attainment, BpbCertificate, EtaBudget, SolveOptions, Solver};
use lattice_bpb::converse::necessity_experiment;
use lattice_bpb::instances::{converse_instance, feasible_instance, instance_rng};
use lattice_bpb::monotonicity::{
    delta_to_eta, estimate_modulus, eta_to_delta, modulus_estimate, validate_modulus, SearchParams,
};
use lattice_bpb::{
    Error, Form, LatticeVector, Matrix, Modulus, NormedLattice, PositiveOperator, Rational, Scalar,
    DEFAULT_N_MAX,
};
use rand::Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::config::{Command, Experiment, Kind, Mode};
use crate::report::{
    digest, BpbReport, CertificateBody, CertificateRecord, ConverseOutcome, ConverseRecord,
    ConverseReport, ModulusPoint, ModulusReport, Outcome, Report, ValidationRow,
};
use crate::verify::verify_record;
use crate::wire::{matrix_to_wire, vector_to_wire, WireScalar};

/// Command-line overrides and output switches.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    /// Fill the `micros` column. Off by default so reruns are byte-identical.
    pub timing: bool,
    pub n_max: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            seed: None,
            mode: None,
            timing: false,
            n_max: DEFAULT_N_MAX,
        }
    }
}

/// A generated or parsed operator/point pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    pub s: PositiveOperator<S>,
    pub x0: LatticeVector<S>,
    pub active_len: Option<usize>,
}

/// An instance, or the raw inputs and the reason they were rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum Draw<S> {
    Ready(Instance<S>),
    Invalid {
        n: usize,
        m: usize,
        s: Value,
        x0: Value,
        error: Error,
    },
}

fn modulus_for<S: Scalar>(lattice: &NormedLattice<S>) -> anyhow::Result<Modulus> {
    lattice.norm().analytic_modulus().with_context(|| {
        format!(
            "the {} norm is not uniformly monotone; pick another codomain",
            lattice.norm().name()
        )
    })
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("Error")
        .to_string()
}

/// Deterministic instances for a `bpb-linfty` / `bpb-c0` experiment.
///
/// Random operators come from the planted generator, one ChaCha stream per
/// instance index. For `bpb-c0` the `n` generated columns form the active
/// block and `tail` zero columns follow, with `x₀` drawn freely there.
/// Fails for experiments no instance can satisfy (e.g. `n > n_max`).
pub fn generate_instances<S: Scalar + FromStr>(
    exp: &Experiment,
    command: Command,
    seed: u64,
    n_max: usize,
) -> anyhow::Result<Vec<Draw<S>>> {
    match exp.kind {
        Kind::Explicit => Ok(exp
            .instances
            .iter()
            .map(|i| explicit::<S>(exp, command, i))
            .collect()),
        Kind::RandomPositiveOperator => {
            let n = exp.dim(0, "n")?;
            let m = exp.dim(1, "m")?;
            if n > n_max {
                bail!("n = {n} exceeds the exact-norm cap {n_max}");
            }
            let lattice = exp.norm.lattice::<S>(m)?;
            let budget = Solver::new(
                exp.epsilon()?,
                &modulus_for(&lattice)?,
                SolveOptions::default(),
            )?
            .budget()
            .clone();
            let tail = if command == Command::BpbC0 {
                exp.tail
            } else {
                0
            };
            Ok((0..exp.count)
                .into_par_iter()
                .map(|i| {
                    random_draw(
                        &mut instance_rng(seed, i as u64),
                        n,
                        tail,
                        &lattice,
                        &budget,
                        n_max,
                    )
                    .unwrap_or_else(|error| Draw::Invalid {
                        n: n + tail,
                        m,
                        s: Value::Null,
                        x0: Value::Null,
                        error,
                    })
                })
                .collect())
        }
        Kind::ConverseInstance => bail!("converse instances belong to the `converse` command"),
    }
}

fn random_draw<S: Scalar>(
    rng: &mut rand_chacha::ChaCha8Rng,
    n: usize,
    tail: usize,
    lattice: &NormedLattice<S>,
    budget: &EtaBudget,
    n_max: usize,
) -> lattice_bpb::Result<Draw<S>> {
    let inst = feasible_instance::<S>(rng, n, lattice, budget, n_max)?;
    if tail == 0 {
        return Ok(Draw::Ready(Instance {
            s: inst.s,
            x0: inst.x0,
            active_len: None,
        }));
    }
    let m = lattice.dim();
    let cols: Vec<Vec<S>> = (0..n + tail)
        .map(|j| {
            if j < n {
                inst.s.matrix().column(j)
            } else {
                vec![S::zero(); m]
            }
        })
        .collect();
    let mut x0 = inst.x0.into_entries();
    for _ in 0..tail {
        let k: i64 = rng.gen_range(-1000..=1000);
        let mag = S::of_usize(k.unsigned_abs() as usize) / S::of_usize(1000);
        x0.push(if k < 0 { -mag } else { mag });
    }
    Ok(Draw::Ready(Instance {
        s: PositiveOperator::new(Matrix::from_columns(&cols)?, lattice.clone())?,
        x0: LatticeVector::new(x0)?,
        active_len: Some(n),
    }))
}

fn explicit<S: Scalar + FromStr>(
    exp: &Experiment,
    command: Command,
    row: &crate::config::ExplicitInstance,
) -> Draw<S> {
    let m = row.matrix.len();
    let n = row.matrix.first().map_or(0, Vec::len);
    let build = || -> anyhow::Result<Instance<S>> {
        let lattice = exp.norm.lattice::<S>(m)?;
        if row.matrix.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: 0,
            }
            .into());
        }
        let data = row
            .matrix
            .iter()
            .flatten()
            .map(|v| v.to_scalar::<S>())
            .collect::<anyhow::Result<Vec<S>>>()?;
        let x0 = row
            .x0
            .iter()
            .map(|v| v.to_scalar::<S>())
            .collect::<anyhow::Result<Vec<S>>>()?;
        let s = PositiveOperator::new(Matrix::from_row_major(m, n, data)?, lattice)?;
        let active_len = match command {
            Command::BpbC0 => Some(row.active_len.unwrap_or(n)),
            _ => None,
        };
        Ok(Instance {
            s,
            x0: LatticeVector::new(x0)?,
            active_len,
        })
    };
    match build() {
        Ok(i) => Draw::Ready(i),
        Err(e) => Draw::Invalid {
            n,
            m,
            s: serde_json::to_value(&row.matrix).unwrap_or(Value::Null),
            x0: serde_json::to_value(&row.x0).unwrap_or(Value::Null),
            error: e
                .downcast::<Error>()
                .unwrap_or_else(|e| Error::Precondition(e.to_string())),
        },
    }
}

fn body<S: WireScalar>(cert: &BpbCertificate<S>) -> CertificateBody {
    CertificateBody {
        t: matrix_to_wire(cert.t.matrix()),
        u0: vector_to_wire(&cert.u0),
        h1: vector_to_wire(&cert.h1),
        h2: vector_to_wire(&cert.h2),
        scale: cert.scale.to_wire(),
        partition: cert.partition.clone(),
        norm_t: cert.measured.norm_t.to_wire(),
        norm_tu0: cert.measured.norm_tu0.to_wire(),
        dist_ops: cert.measured.dist_ops.to_wire(),
        dist_ops_exact: cert.measured.dist_ops_exact,
        dist_points: cert.measured.dist_points.to_wire(),
        ledger_ok: cert.ledger_ok(),
        ledger: cert.ledger.clone(),
        verified: false,
        verify_failures: Vec::new(),
    }
}

/// Precondition first; under `enforce` an unmet precondition ends the row.
/// Otherwise the construction runs in recording mode so the whole ledger is
/// kept even when a step fails.
fn solve<S: WireScalar>(
    inst: &Instance<S>,
    command: Command,
    solver: &Solver,
    enforce: bool,
) -> (Option<bool>, Outcome) {
    let failed = |e: &Error| Outcome::Failed {
        kind: error_kind(e),
        message: e.to_string(),
    };
    let met = match near_attainment(&inst.s, &inst.x0, solver.budget()) {
        Ok(m) => m,
        Err(e) => return (None, failed(&e)),
    };
    if enforce && !met {
        let e = Error::Precondition(format!(
            "‖S x0‖ > (1 − {})‖S‖",
            solver.budget().eta_definition
        ));
        return (Some(false), failed(&e));
    }
    let run = match (command, inst.active_len) {
        (Command::BpbC0, Some(len)) => solver.c0(&inst.s, &inst.x0, len),
        _ => solver.linfty(&inst.s, &inst.x0),
    };
    match run {
        Ok(cert) => (Some(met), Outcome::Certificate(Box::new(body(&cert)))),
        Err(
            e @ (Error::Precondition(_) | Error::NotUnitPoint(_) | Error::DimensionMismatch { .. }),
        ) => (Some(false), failed(&e)),
        Err(e) => (Some(met), failed(&e)),
    }
}

/// Runs every instance of a `bpb-linfty` / `bpb-c0` experiment and
/// re-verifies each certificate from its serialized form.
pub fn bpb_report<S: WireScalar + FromStr>(
    exp: &Experiment,
    command: Command,
    seed: u64,
    opts: &RunOptions,
    label: &str,
) -> anyhow::Result<BpbReport> {
    let mode = if S::EXACT {
        Mode::Rational
    } else {
        Mode::Float
    };
    let draws = generate_instances::<S>(exp, command, seed, opts.n_max)?;
    let probe_dim = draws.iter().find_map(|d| match d {
        Draw::Ready(i) => Some(i.s.codomain_dim()),
        Draw::Invalid { .. } => None,
    });
    let modulus = modulus_for(
        &exp.norm
            .lattice::<S>(probe_dim.unwrap_or_else(|| exp.dims.get(1).copied().unwrap_or(1)))?,
    )?;
    let solver = Solver::new(
        exp.epsilon()?,
        &modulus,
        SolveOptions {
            n_max: opts.n_max,
            ..SolveOptions::record()
        },
    )?;
    let enforce = exp.policy == lattice_bpb::bpb::Policy::Enforce;
    let budget = solver.budget().clone();

    let rows: Vec<(CertificateRecord, Option<u128>)> = draws
        .par_iter()
        .enumerate()
        .map(|(id, draw)| {
            let start = Instant::now();
            let (n, m, s, x0, active_len, precond_met, outcome) = match draw {
                Draw::Ready(inst) => {
                    let (met, outcome) = solve(inst, command, &solver, enforce);
                    (
                        inst.s.domain_dim(),
                        inst.s.codomain_dim(),
                        matrix_to_wire(inst.s.matrix()),
                        vector_to_wire(&inst.x0),
                        inst.active_len,
                        met,
                        outcome,
                    )
                }
                Draw::Invalid { n, m, s, x0, error } => (
                    *n,
                    *m,
                    s.clone(),
                    x0.clone(),
                    None,
                    None,
                    Outcome::Failed {
                        kind: error_kind(error),
                        message: error.to_string(),
                    },
                ),
            };
            let mut rec = CertificateRecord {
                instance_id: id,
                input_digest: String::new(),
                command,
                mode,
                norm: exp.norm.clone(),
                n,
                m,
                epsilon: budget.epsilon,
                eta_internal: budget.eta_internal,
                eta_definition: budget.eta_definition,
                active_len,
                s,
                x0,
                precond_met,
                outcome,
            };
            rec.input_digest = digest(&rec.inputs());
            if rec.certificate().is_some() {
                let check = verify_record(&rec);
                if let Outcome::Certificate(body) = &mut rec.outcome {
                    match check {
                        Ok(ledger) => {
                            body.verified = ledger.all_hold();
                            body.verify_failures =
                                ledger.failures().map(|c| c.to_string()).collect();
                        }
                        Err(e) => body.verify_failures = vec![format!("{e:#}")],
                    }
                }
            }
            let micros = opts.timing.then(|| start.elapsed().as_micros());
            (rec, micros)
        })
        .collect();
    let (records, micros): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(BpbReport {
        experiment: label.to_string(),
        command,
        seed,
        mode,
        summary: BpbReport::summarize(&records),
        records,
        micros,
    })
}

/// The adversarial-operator experiment over `u_norms × count` draws.
pub fn converse_report(
    exp: &Experiment,
    seed: u64,
    opts: &RunOptions,
    label: &str,
) -> anyhow::Result<ConverseReport> {
    if exp.mode == Mode::Rational {
        bail!("converse runs are float-only");
    }
    if !matches!(
        exp.kind,
        Kind::ConverseInstance | Kind::RandomPositiveOperator
    ) {
        bail!("converse runs draw their own instances (kind = \"converse_instance\")");
    }
    let dim_m = exp.dim(0, "dim_M")?;
    let dim_n = exp.dim(1, "dim_N")?;
    let m = exp.dim(2, "m")?;
    if dim_m + dim_n > opts.n_max {
        bail!(
            "domain dimension {} exceeds the exact-norm cap {}",
            dim_m + dim_n,
            opts.n_max
        );
    }
    let lattice = exp.norm.lattice::<f64>(m)?;
    let modulus = modulus_for(&lattice)?;
    let epsilon = exp.epsilon()?;
    let u_norms = if exp.u_norms.is_empty() {
        vec![0.1, 0.3, 0.5]
    } else {
        exp.u_norms.clone()
    };
    let cases: Vec<f64> = u_norms
        .iter()
        .flat_map(|&u| std::iter::repeat_n(u, exp.count))
        .collect();

    let rows: Vec<(ConverseRecord, Option<u128>)> = cases
        .par_iter()
        .enumerate()
        .map(|(id, &target)| {
            let start = Instant::now();
            let mut rng = instance_rng(seed, id as u64);
            let drawn = converse_instance(&mut rng, dim_m, dim_n, &lattice, target);
            let (u, v, m0, n0) = match &drawn {
                Ok(i) => (i.u.to_f64(), i.v.to_f64(), i.m0.to_f64(), i.n0.to_f64()),
                Err(_) => Default::default(),
            };
            let outcome = drawn
                .and_then(|inst| {
                    necessity_experiment(
                        &inst,
                        epsilon,
                        &modulus,
                        exp.alternatives,
                        seed.wrapping_add(id as u64),
                    )
                })
                .map_or_else(
                    |e| ConverseOutcome::Failed {
                        kind: error_kind(&e),
                        message: e.to_string(),
                    },
                    |row| ConverseOutcome::Measured {
                        passes: row.passes(),
                        row,
                    },
                );
            let inputs = serde_json::json!({
                "norm": exp.norm, "epsilon": epsilon, "dims": [dim_m, dim_n, m],
                "u": u, "v": v, "m0": m0, "n0": n0,
            });
            let rec = ConverseRecord {
                instance_id: id,
                input_digest: digest(&inputs),
                dim_m,
                dim_n,
                m,
                norm: exp.norm.clone(),
                target_u_norm: target,
                u,
                v,
                m0,
                n0,
                outcome,
            };
            (rec, opts.timing.then(|| start.elapsed().as_micros()))
        })
        .collect();
    let (records, micros): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(ConverseReport {
        experiment: label.to_string(),
        seed,
        summary: ConverseReport::summarize(&records),
        records,
        micros,
    })
}

/// Numeric modulus estimates plus validation of every modulus on offer.
pub fn modulus_report(exp: &Experiment, seed: u64, label: &str) -> anyhow::Result<ModulusReport> {
    if exp.mode == Mode::Rational {
        bail!("modulus runs are float-only");
    }
    let n = exp.dim(0, "n")?;
    let lattice = exp.norm.lattice::<f64>(n)?;
    let epsilons = if exp.epsilons.is_empty() {
        vec![0.1, 0.5, 0.9]
    } else {
        exp.epsilons.clone()
    };
    let params = SearchParams {
        seed,
        ..SearchParams::default()
    };
    let estimates = epsilons
        .par_iter()
        .map(|&e| modulus_estimate(&lattice, e, &params))
        .collect::<lattice_bpb::Result<Vec<_>>>()?;
    let numeric = estimate_modulus(&lattice, &epsilons, &params)?;
    let analytic = lattice.norm().analytic_modulus();
    let points = estimates
        .into_iter()
        .map(|estimate| {
            let e = estimate.epsilon;
            ModulusPoint {
                analytic_delta: analytic.as_ref().map(|m| m.eval(e)),
                analytic_eta: analytic.as_ref().map(|m| {
                    let d = m.eval(e);
                    d / (1.0 + d)
                }),
                numeric_delta: numeric.eval(e),
                estimate,
            }
        })
        .collect::<Vec<_>>();

    let mut candidates: Vec<Modulus> = Vec::new();
    if let Some(delta) = &analytic {
        let eta2 = delta_to_eta(delta, Form::Eta2)?;
        let eta3 = delta_to_eta(delta, Form::Eta3)?;
        let back = eta_to_delta(&eta2)?;
        candidates.extend([delta.clone(), eta2, eta3, back]);
    }
    // a zero modulus is not a witness for a norm that is not uniformly monotone
    if points.iter().all(|p| p.estimate.uniformly_monotone) {
        candidates.push(numeric);
    }
    let validations: Vec<ValidationRow> = candidates
        .par_iter()
        .enumerate()
        .map(|(k, m)| {
            let r = validate_modulus(&lattice, m, exp.samples, seed.wrapping_add(k as u64));
            ValidationRow {
                modulus: m.label().to_string(),
                form: m.form().name().to_string(),
                samples: r.samples,
                violation_count: r.violation_count,
                passed: r.passed(),
            }
        })
        .collect();
    Ok(ModulusReport {
        experiment: label.to_string(),
        n,
        norm: exp.norm.clone(),
        seed,
        violations: validations.iter().filter(|v| !v.passed).count(),
        points,
        validations,
    })
}

/// Runs one experiment under `command`, applying the overrides in `opts`.
pub fn run_experiment(
    exp: &Experiment,
    command: Command,
    opts: &RunOptions,
    label: &str,
) -> anyhow::Result<Report> {
    let mut exp = exp.clone();
    if let Some(mode) = opts.mode {
        exp.mode = mode;
    }
    let seed = opts.seed.unwrap_or(exp.seed);
    Ok(match command {
        Command::Modulus => Report::Modulus(modulus_report(&exp, seed, label)?),
        Command::Converse => Report::Converse(converse_report(&exp, seed, opts, label)?),
        Command::BpbLinfty | Command::BpbC0 => Report::Bpb(match exp.mode {
            Mode::Float => bpb_report::<f64>(&exp, command, seed, opts, label)?,
            Mode::Rational => bpb_report::<Rational>(&exp, command, seed, opts, label)?,
        }),
    })
}

/// One finished experiment and the files written for it.
#[derive(Debug)]
pub struct SuiteEntry {
    pub label: String,
    pub command: Command,
    pub report: Report,
    pub files: Vec<PathBuf>,
}

/// Runs every experiment. With `command` set, experiments must name that
/// command or none; without it, each must name its own. Reports go to
/// `out_dir` when given. Config problems abort the whole suite.
pub fn run_suite(
    experiments: &[Experiment],
    command: Option<Command>,
    opts: &RunOptions,
    out_dir: Option<&Path>,
) -> anyhow::Result<Vec<SuiteEntry>> {
    let mut plan = Vec::with_capacity(experiments.len());
    for (k, exp) in experiments.iter().enumerate() {
        let cmd = match (command, exp.command) {
            (Some(c), None) => c,
            (Some(c), Some(e)) if c == e => c,
            (Some(c), Some(e)) => bail!(
                "experiment {k} is a {} experiment, not {}",
                e.name(),
                c.name()
            ),
            (None, Some(e)) => e,
            (None, None) => bail!("experiment {k} does not say which command to run"),
        };
        plan.push((exp, cmd, exp.label(k)));
    }
    let mut out = Vec::with_capacity(plan.len());
    for (exp, cmd, label) in plan {
        let report = run_experiment(exp, cmd, opts, &label)
            .with_context(|| format!("experiment {label}"))?;
        let files = match out_dir {
            Some(dir) => report.write(dir, &label)?,
            None => Vec::new(),
        };
        out.push(SuiteEntry {
            label,
            command: cmd,
            report,
            files,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn exp(text: &str) -> Experiment {
        parse(text, Some("toml")).unwrap().remove(0)
    }

    #[test]
    fn oversized_spec_is_rejected() {
        let e = exp("dims = [30, 3]\nepsilon = 0.5\ncount = 2\nnorm = { family = \"l1\" }");
        let err = generate_instances::<f64>(&e, Command::BpbLinfty, 0, DEFAULT_N_MAX).unwrap_err();
        assert!(err.to_string().contains("exceeds"), "{err}");
    }

    #[test]
    fn same_seed_same_draws() {
        let e = exp("dims = [5, 4]\nepsilon = 0.6\ncount = 10\nseed = 42\nnorm = { family = \"lp\", p = 2.0 }");
        let a = generate_instances::<f64>(&e, Command::BpbLinfty, 42, DEFAULT_N_MAX).unwrap();
        let b = generate_instances::<f64>(&e, Command::BpbLinfty, 42, DEFAULT_N_MAX).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
    }

    #[test]
    fn feasible_draws_meet_the_precondition() {
        let e = exp("dims = [6, 5]\nepsilon = 0.3\ncount = 25\nnorm = { family = \"l1\" }");
        let solver = Solver::new(0.3, &Modulus::l1(), SolveOptions::default()).unwrap();
        for d in generate_instances::<Rational>(&e, Command::BpbLinfty, 9, DEFAULT_N_MAX).unwrap() {
            let Draw::Ready(i) = d else {
                panic!("invalid draw")
            };
            assert!(near_attainment(&i.s, &i.x0, solver.budget()).unwrap());
        }
    }

    #[test]
    fn c0_draws_have_a_zero_tail() {
        let e =
            exp("dims = [3, 2]\nepsilon = 0.6\ncount = 5\ntail = 4\nnorm = { family = \"l1\" }");
        for d in generate_instances::<f64>(&e, Command::BpbC0, 1, DEFAULT_N_MAX).unwrap() {
            let Draw::Ready(i) = d else {
                panic!("invalid draw")
            };
            assert_eq!(i.s.domain_dim(), 7);
            assert_eq!(i.active_len, Some(3));
            assert!((3..7).all(|j| i.s.matrix().column(j).iter().all(|v| *v == 0.0)));
        }
    }

    #[test]
    fn sup_codomain_is_refused() {
        let e = exp("dims = [3, 2]\nepsilon = 0.6\nnorm = { family = \"sup\" }");
        assert!(run_experiment(&e, Command::BpbLinfty, &RunOptions::default(), "x").is_err());
    }

    #[test]
    fn mismatched_command_is_a_config_error() {
        let e = exp("command = \"modulus\"\ndims = [3]\nnorm = { family = \"l1\" }");
        assert!(run_suite(&[e], Some(Command::Converse), &RunOptions::default(), None).is_err());
    }
}
