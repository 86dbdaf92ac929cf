//! The correction itself: from a nearly norm-attaining pair `(S, x₀)` to a
//! norm-attaining pair `(T, u₀)` nearby.

use serde::{Deserialize, Serialize};

use crate::bpb::budget::{compute_eta, EtaBudget};
use crate::bpb::ledger::{Ledger, Relation};
use crate::bpb::split::split_construction;
use crate::error::{Error, Result};
use crate::lattice::LatticeVector;
use crate::monotonicity::Modulus;
use crate::operator::{operator_norm_general, Matrix, PositiveOperator, DEFAULT_N_MAX};
use crate::scalar::Scalar;

/// What to do when a precondition or a recorded inequality fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Refuse points that are not near-attaining and turn any failed check into an error.
    #[default]
    Enforce,
    /// Run the construction regardless and leave failures in the ledger.
    Record,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Comparison slack; `None` uses the scalar's default (zero for rationals).
    pub tol: Option<f64>,
    /// Largest domain dimension for which `‖T − S‖` is computed exactly.
    pub n_max: usize,
    pub policy: Policy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: None,
            n_max: DEFAULT_N_MAX,
            policy: Policy::Enforce,
        }
    }
}

impl SolveOptions {
    pub fn record() -> Self {
        Self {
            policy: Policy::Record,
            ..Self::default()
        }
    }

    fn tol<S: Scalar>(&self) -> S {
        self.tol.map_or_else(S::default_tol, S::lift)
    }
}

/// `A = {x₀ < −1 + η}`, `B = {x₀ > 1 − η}`, `C` the rest (boundary ties land in `C`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl Partition {
    pub fn of<S: Scalar>(x0: &LatticeVector<S>, eta: &S) -> Self {
        let one = S::one();
        let lower = eta.clone() - one.clone();
        let upper = one - eta.clone();
        let mut p = Partition {
            a: Vec::new(),
            b: Vec::new(),
            c: Vec::new(),
        };
        for (k, x) in x0.entries().iter().enumerate() {
            if *x < lower {
                p.a.push(k);
            } else if *x > upper {
                p.b.push(k);
            } else {
                p.c.push(k);
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.a.len() + self.b.len() + self.c.len()
    }

    fn mask(&self, set: &[usize]) -> Vec<bool> {
        let mut m = vec![false; self.dim()];
        for &k in set {
            m[k] = true;
        }
        m
    }

    pub fn mask_a(&self) -> Vec<bool> {
        self.mask(&self.a)
    }

    pub fn mask_b(&self) -> Vec<bool> {
        self.mask(&self.b)
    }

    pub fn mask_c(&self) -> Vec<bool> {
        self.mask(&self.c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurements<S> {
    pub norm_t: S,
    pub norm_tu0: S,
    /// `‖T − S‖` against the normalized input.
    pub dist_ops: S,
    /// `false` when the domain exceeded `n_max` and `dist_ops` is the
    /// upper bound `‖T − U‖ + ‖U − S‖`.
    pub dist_ops_exact: bool,
    /// `‖u₀ − x₀‖_∞`.
    pub dist_points: S,
}

/// Output of a correction run.
#[derive(Debug, Clone, PartialEq)]
pub struct BpbCertificate<S> {
    pub t: PositiveOperator<S>,
    pub u0: LatticeVector<S>,
    pub measured: Measurements<S>,
    pub budget: EtaBudget,
    pub partition: Partition,
    /// Factor the input was multiplied by to reach norm one.
    pub scale: S,
    /// The input after normalization; distances are measured against it.
    pub normalized: PositiveOperator<S>,
    pub h1: LatticeVector<S>,
    pub h2: LatticeVector<S>,
    pub precondition_met: bool,
    pub ledger: Ledger,
}

impl<S: Scalar> BpbCertificate<S> {
    pub fn ledger_ok(&self) -> bool {
        self.ledger.all_hold()
    }
}

/// Whether `‖S x₀‖ > (1 − eta_definition)·‖S‖`, i.e. the point is close
/// enough to attaining for `budget`. Uses the deficit form so that tiny
/// tolerances are not lost to cancellation in `1 − ‖S x₀‖/‖S‖`.
pub fn near_attainment<S: Scalar>(
    s: &PositiveOperator<S>,
    x0: &LatticeVector<S>,
    budget: &EtaBudget,
) -> Result<bool> {
    Ok(attainment_deficit(s, x0, budget)?.0)
}

fn attainment_deficit<S: Scalar>(
    s: &PositiveOperator<S>,
    x0: &LatticeVector<S>,
    budget: &EtaBudget,
) -> Result<(bool, f64, f64)> {
    if x0.dim() != s.domain_dim() {
        return Err(Error::DimensionMismatch {
            expected: s.domain_dim(),
            found: x0.dim(),
        });
    }
    let norm = s.norm();
    let deficit = norm.clone() - s.norm_at(x0);
    let allowed = S::lift(budget.eta_definition) * norm.clone();
    let relative = if norm.is_zero() {
        f64::INFINITY
    } else {
        (deficit.clone() / norm).approx()
    };
    Ok((deficit < allowed, relative, budget.eta_definition))
}

/// `‖T(Σ_{k<n} e_k)‖` for `n = 1..=len`.
pub fn partial_sum_norms<S: Scalar>(t: &PositiveOperator<S>, len: usize) -> Vec<S> {
    let len = len.min(t.domain_dim());
    let mut x = vec![false; t.domain_dim()];
    (0..len)
        .map(|k| {
            x[k] = true;
            t.norm_at(&LatticeVector::indicator(&x))
        })
        .collect()
}

/// `sup_n ‖T(χ_{C ∩ {k < n}})‖` over `n = 1..=len`; zero when `C` is empty.
pub fn truncation_sup<S: Scalar>(t: &PositiveOperator<S>, mask: &[bool], len: usize) -> S {
    let len = len.min(t.domain_dim());
    let mut x = vec![false; t.domain_dim()];
    let mut best = S::zero();
    for k in 0..len {
        x[k] = mask[k];
        let v = t.norm_at(&LatticeVector::indicator(&x));
        if v > best {
            best = v;
        }
    }
    best
}

/// How the bound on the `C`-block is evaluated.
enum ComplementBound {
    Full,
    Truncations(usize),
}

/// A fixed `ε`, modulus and option set, with the budget computed once.
#[derive(Debug, Clone)]
pub struct Solver {
    budget: EtaBudget,
    options: SolveOptions,
}

impl Solver {
    pub fn new(epsilon: f64, modulus: &Modulus, options: SolveOptions) -> Result<Self> {
        Ok(Self {
            budget: compute_eta(epsilon, modulus)?,
            options,
        })
    }

    pub fn budget(&self) -> &EtaBudget {
        &self.budget
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    /// Correction for the domain `(ℝⁿ, ‖·‖_∞)`.
    pub fn linfty<S: Scalar>(
        &self,
        s: &PositiveOperator<S>,
        x0: &LatticeVector<S>,
    ) -> Result<BpbCertificate<S>> {
        self.run(s, x0, ComplementBound::Full)
    }

    /// Correction for finitely supported sequences: only the first
    /// `active_len` columns of `s` may be nonzero, and `x₀` must reach sup
    /// norm one inside that block.
    pub fn c0<S: Scalar>(
        &self,
        s: &PositiveOperator<S>,
        x0: &LatticeVector<S>,
        active_len: usize,
    ) -> Result<BpbCertificate<S>> {
        let n = s.domain_dim();
        if active_len == 0 || active_len > n {
            return Err(Error::Precondition(format!(
                "active length {active_len} outside 1..={n}"
            )));
        }
        let m = s.matrix();
        for j in active_len..n {
            if (0..m.rows()).any(|i| !m.get(i, j).is_zero()) {
                return Err(Error::Precondition(format!(
                    "column {j} lies beyond the active length {active_len} but is nonzero"
                )));
            }
        }
        if x0.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.dim(),
            });
        }
        let head = x0.entries()[..active_len]
            .iter()
            .map(|v| v.abs())
            .fold(S::zero(), S::max_of);
        let tol = self.options.tol::<S>();
        if head < S::one() - tol {
            return Err(Error::Precondition(
                "sup of x0 is attained only outside the active block".into(),
            ));
        }
        self.run(s, x0, ComplementBound::Truncations(active_len))
    }

    fn run<S: Scalar>(
        &self,
        s: &PositiveOperator<S>,
        x0: &LatticeVector<S>,
        bound: ComplementBound,
    ) -> Result<BpbCertificate<S>> {
        let budget = &self.budget;
        let enforce = self.options.policy == Policy::Enforce;
        let tol = self.options.tol::<S>();
        let n = s.domain_dim();
        if x0.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.dim(),
            });
        }
        let one = S::one();
        let sup = x0.sup_norm();
        if (sup.clone() - one.clone()).abs() > tol {
            return Err(Error::NotUnitPoint(sup.approx()));
        }
        let norm_s = s.norm();
        if norm_s.is_zero() {
            return Err(Error::Degenerate("operator is zero"));
        }
        let (met, deficit, allowed) = attainment_deficit(s, x0, budget)?;
        if enforce && !met {
            return Err(Error::NotNearAttaining { deficit, allowed });
        }
        let (s, scale) = if norm_s == one {
            (s.clone(), one.clone())
        } else {
            let scale = one.clone() / norm_s;
            (s.scaled(&scale)?, scale)
        };

        let eps = S::lift(budget.epsilon);
        let eta = S::lift(budget.eta_internal);
        let partition = Partition::of(x0, &eta);
        let (mask_a, mask_b, mask_c) = (partition.mask_a(), partition.mask_b(), partition.mask_c());
        let mut ledger = Ledger::new();

        // Bounds on the three blocks.
        let s_c = match bound {
            ComplementBound::Full => s.norm_at(&LatticeVector::indicator(&mask_c)),
            ComplementBound::Truncations(len) => truncation_sup(&s, &mask_c, len),
        };
        ledger.record("complement_block_small", &s_c, Relation::Le, &eta, &tol);
        let s_x0c = s.norm_at(&x0.restrict(&mask_c));
        ledger.record(
            "complement_image_dominated",
            &s_x0c,
            Relation::Le,
            &s_c,
            &tol,
        );

        let s_a = s.image_of_indicator(&mask_a);
        let s_b = s.image_of_indicator(&mask_b);
        let s_x0a = s.apply(&x0.restrict(&mask_a));
        let s_x0b = s.apply(&x0.restrict(&mask_b));
        let y = s.codomain();
        ledger.record(
            "negative_block_close",
            &y.norm_of(&s_a.add(&s_x0a)?),
            Relation::Le,
            &eta,
            &tol,
        );
        ledger.record(
            "positive_block_close",
            &y.norm_of(&s_x0b.sub(&s_b)?),
            Relation::Le,
            &eta,
            &tol,
        );
        let separation = S::lift(budget.split_threshold());
        ledger.record(
            "blocks_separated",
            &y.norm_of(&s_b.sub(&s_a)?),
            Relation::Gt,
            &separation,
            &tol,
        );

        // Disjoint-support replacement of (S χ_A, S χ_B) at ε/6.
        let split_eps = budget.epsilon / 6.0;
        let split = split_construction(&s_a, &s_b, split_eps, y, &budget.modulus, &tol)?;
        ledger.extend_prefixed("split", split.ledger.clone());
        let keep_a = split.h1.support_mask();
        let keep_b = split.h2.support_mask();
        let sixth = eps.clone() / S::of_usize(6);
        ledger.record(
            "outside_support_negative",
            &y.norm_of(&s_a.restrict(&negate(&keep_a))),
            Relation::Lt,
            &sixth,
            &tol,
        );
        ledger.record(
            "outside_support_positive",
            &y.norm_of(&s_b.restrict(&negate(&keep_b))),
            Relation::Lt,
            &sixth,
            &tol,
        );

        // U keeps S(e_j)(i) for j ∈ A, i ∈ supp h₁ and j ∈ B, i ∈ supp h₂.
        let sm = s.matrix();
        let mut u = Matrix::zeros(sm.rows(), sm.cols());
        for i in 0..sm.rows() {
            for j in 0..sm.cols() {
                if (mask_a[j] && keep_a[i]) || (mask_b[j] && keep_b[i]) {
                    u.set(i, j, sm.get(i, j).clone());
                }
            }
        }
        let u = PositiveOperator::new(u, y.clone())?;
        let half = eps.clone() / S::two();
        // S − U is entrywise positive, so its norm is its value at 𝟙.
        let s_minus_u = PositiveOperator::new(sm.sub(u.matrix())?, y.clone())?;
        let dist_su = s_minus_u.norm();
        ledger.record("perturbation_small", &dist_su, Relation::Lt, &half, &tol);
        let norm_u = u.norm();
        ledger.record(
            "unnormalized_norm_close",
            &(norm_u.clone() - one.clone()).abs(),
            Relation::Lt,
            &half,
            &tol,
        );
        if norm_u.is_zero() {
            return Err(Error::Degenerate("corrected operator vanishes"));
        }
        let t = if norm_u == one {
            u
        } else {
            u.scaled(&(one.clone() / norm_u.clone()))?
        };

        let u0_entries: Vec<S> = x0
            .entries()
            .iter()
            .enumerate()
            .map(|(k, x)| {
                if mask_a[k] {
                    -one.clone()
                } else if mask_b[k] {
                    one.clone()
                } else {
                    x.clone()
                }
            })
            .collect();
        let u0 = LatticeVector::new(u0_entries)?;

        let norm_t = t.norm();
        let norm_tu0 = t.norm_at(&u0);
        let (dist_ops, dist_ops_exact) = match t.matrix().sub(sm) {
            Ok(diff) if n <= self.options.n_max => {
                (operator_norm_general(&diff, y, self.options.n_max)?, true)
            }
            _ => ((norm_u - one.clone()).abs() + dist_su, false),
        };
        let dist_points = u0.sub(x0)?.sup_norm();
        ledger.record_bool("target_positive", t.matrix().is_nonnegative());
        ledger.record("unit_norm", &norm_t, Relation::Eq, &one, &tol);
        ledger.record("attains_norm", &norm_tu0, Relation::Eq, &norm_t, &tol);
        ledger.record(
            "operator_distance",
            &dist_ops,
            Relation::Lt,
            &eps,
            &S::zero(),
        );
        ledger.record("point_distance", &dist_points, Relation::Le, &eta, &tol);
        ledger.record("eta_below_epsilon", &eta, Relation::Lt, &eps, &S::zero());

        if enforce {
            if let Some(e) = ledger.first_violation() {
                return Err(e);
            }
        }
        Ok(BpbCertificate {
            t,
            u0,
            measured: Measurements {
                norm_t,
                norm_tu0,
                dist_ops,
                dist_ops_exact,
                dist_points,
            },
            budget: budget.clone(),
            partition,
            scale,
            normalized: s,
            h1: split.h1,
            h2: split.h2,
            precondition_met: met,
            ledger,
        })
    }
}

fn negate(mask: &[bool]) -> Vec<bool> {
    mask.iter().map(|b| !b).collect()
}

/// Corrects `(S, x₀)` on the sup-norm domain with default options.
pub fn bpb_correct_linfty<S: Scalar>(
    s: &PositiveOperator<S>,
    x0: &LatticeVector<S>,
    epsilon: f64,
    modulus: &Modulus,
) -> Result<BpbCertificate<S>> {
    Solver::new(epsilon, modulus, SolveOptions::default())?.linfty(s, x0)
}

/// Corrects `(S, x₀)` on finitely supported sequences of active length `active_len`.
pub fn bpb_correct_c0<S: Scalar>(
    s: &PositiveOperator<S>,
    x0: &LatticeVector<S>,
    active_len: usize,
    epsilon: f64,
    modulus: &Modulus,
) -> Result<BpbCertificate<S>> {
    Solver::new(epsilon, modulus, SolveOptions::default())?.c0(s, x0, active_len)
}

/// Replaces `u₀` by `|u₀|` for a positive `x₀`. The lifted point still
/// attains the norm and is no farther from `x₀`; both facts are appended to
/// the ledger and a failure is an error.
pub fn positivity_lift<S: Scalar>(
    cert: &BpbCertificate<S>,
    x0: &LatticeVector<S>,
    tol: Option<f64>,
) -> Result<BpbCertificate<S>> {
    if !x0.is_nonnegative() {
        return Err(Error::Precondition("positivity lift needs x0 ≥ 0".into()));
    }
    if x0.dim() != cert.u0.dim() {
        return Err(Error::DimensionMismatch {
            expected: cert.u0.dim(),
            found: x0.dim(),
        });
    }
    let tol = tol.map_or_else(S::default_tol, S::lift);
    let lifted = cert.u0.abs();
    let norm_tu0 = cert.t.norm_at(&lifted);
    let dist_points = lifted.sub(x0)?.sup_norm();
    let old_dist = cert.u0.sub(x0)?.sup_norm();
    let mut checks = Ledger::new();
    checks.record(
        "attains_norm",
        &norm_tu0,
        Relation::Eq,
        &cert.measured.norm_t,
        &tol,
    );
    checks.record(
        "distance_not_increased",
        &dist_points,
        Relation::Le,
        &old_dist,
        &tol,
    );
    if let Some(e) = checks.first_violation() {
        return Err(e);
    }
    let mut out = cert.clone();
    out.u0 = lifted;
    out.measured.norm_tu0 = norm_tu0;
    out.measured.dist_points = dist_points;
    out.ledger.extend_prefixed("lift", checks);
    Ok(out)
}
