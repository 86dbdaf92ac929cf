//! Why the codomain has to be uniformly monotone.
//!
//! On a domain `X = M ⊕_∞ N`, the operator
//! `S(x) = m₀*(Px)(v − u) + n₀*(Qx)u` has norm one, nearly attains it at
//! `m₀ ⊕ 0` when `‖v − u‖` is close to one, and any positive `T` attaining
//! its norm near `m₀ ⊕ 0` with `T(n₀) = 0` is at distance at least `‖u‖`
//! from `S`. The experiment runs the correction on such `S`, confirms the
//! lower bound on the certificate it gets, and charts `‖S − T‖` against `‖u‖`.
//!
//! In finite dimensions every strictly monotone norm is already uniformly
//! monotone, so no finite instance separates the two notions; the sweep only
//! shows how the achievable `ε` degrades as `‖u‖` grows.

use rand::Rng;
use serde::Serialize;

use crate::bpb::{positivity_lift, BpbCertificate, Policy, SolveOptions, Solver};
use crate::error::{Error, Result};
use crate::instances::instance_rng;
use crate::lattice::{LatticeVector, NormedLattice};
use crate::monotonicity::Modulus;
use crate::operator::{operator_norm_general, Matrix, PositiveOperator};
use crate::scalar::Scalar;

/// Entrywise bound under which `T(n₀)` counts as zero.
pub const TN0_TOL: f64 = 1e-8;

/// Slack in the lower bound `‖S − T‖ ≥ ‖u‖`.
pub const BOUND_TOL: f64 = 1e-6;

/// `ℝ^{dim_m} ⊕_∞ ℝ^{dim_n}`: coordinates `0..dim_m` form `M`, the rest `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InftySumDomain {
    pub dim_m: usize,
    pub dim_n: usize,
}

impl InftySumDomain {
    pub fn new(dim_m: usize, dim_n: usize) -> Result<Self> {
        if dim_m == 0 || dim_n == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(Self { dim_m, dim_n })
    }

    pub fn dim(&self) -> usize {
        self.dim_m + self.dim_n
    }

    fn check<S: Scalar>(&self, x: &LatticeVector<S>) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// `P x`, padded with zeros on `N`.
    pub fn project_m<S: Scalar>(&self, x: &LatticeVector<S>) -> LatticeVector<S> {
        x.restrict(&self.mask(true))
    }

    /// `Q x`, padded with zeros on `M`.
    pub fn project_n<S: Scalar>(&self, x: &LatticeVector<S>) -> LatticeVector<S> {
        x.restrict(&self.mask(false))
    }

    fn mask(&self, m_block: bool) -> Vec<bool> {
        (0..self.dim())
            .map(|k| (k < self.dim_m) == m_block)
            .collect()
    }

    /// `m ⊕ n` from the two blocks.
    pub fn join<S: Scalar>(
        &self,
        m: &LatticeVector<S>,
        n: &LatticeVector<S>,
    ) -> Result<LatticeVector<S>> {
        if m.dim() != self.dim_m || n.dim() != self.dim_n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: m.dim() + n.dim(),
            });
        }
        LatticeVector::new(m.entries().iter().chain(n.entries()).cloned().collect())
    }

    /// The `M` block of `x` as a vector of length `dim_m`.
    pub fn m_part<S: Scalar>(&self, x: &LatticeVector<S>) -> LatticeVector<S> {
        LatticeVector::new(x.entries()[..self.dim_m].to_vec()).expect("nonempty block")
    }

    /// The `N` block of `x` as a vector of length `dim_n`.
    pub fn n_part<S: Scalar>(&self, x: &LatticeVector<S>) -> LatticeVector<S> {
        LatticeVector::new(x.entries()[self.dim_m..].to_vec()).expect("nonempty block")
    }
}

/// Data for the adversarial operator: `0 ≤ u ≤ v`, `‖v‖ = 1`, positive unit
/// vectors `m₀ ∈ M`, `n₀ ∈ N` and coordinate functionals attaining one on them.
#[derive(Debug, Clone, PartialEq)]
pub struct ConverseInstance<S> {
    pub domain: InftySumDomain,
    pub codomain: NormedLattice<S>,
    pub u: LatticeVector<S>,
    pub v: LatticeVector<S>,
    pub m0: LatticeVector<S>,
    pub n0: LatticeVector<S>,
    /// Coordinate of `M` read by `m₀*`: the first maximal coordinate of `m₀`.
    pub m0_star: usize,
    /// Coordinate of `N` read by `n₀*`.
    pub n0_star: usize,
}

fn first_argmax<S: Scalar>(x: &LatticeVector<S>) -> usize {
    let mut best = 0;
    for (k, e) in x.entries().iter().enumerate() {
        if *e > x.entries()[best] {
            best = k;
        }
    }
    best
}

impl<S: Scalar> ConverseInstance<S> {
    pub fn new(
        domain: InftySumDomain,
        codomain: NormedLattice<S>,
        u: LatticeVector<S>,
        v: LatticeVector<S>,
        m0: LatticeVector<S>,
        n0: LatticeVector<S>,
    ) -> Result<Self> {
        let tol = S::default_tol();
        for (x, d) in [
            (&u, codomain.dim()),
            (&v, codomain.dim()),
            (&m0, domain.dim_m),
            (&n0, domain.dim_n),
        ] {
            if x.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.dim(),
                });
            }
        }
        if !(u.is_nonnegative() && u.le(&v)) {
            return Err(Error::Precondition("need 0 ≤ u ≤ v".into()));
        }
        let nv = codomain.norm_of(&v);
        if (nv.clone() - S::one()).abs() > tol {
            return Err(Error::Precondition(format!(
                "need ‖v‖ = 1, got {}",
                nv.approx()
            )));
        }
        for (name, x) in [("m0", &m0), ("n0", &n0)] {
            if !x.is_nonnegative() || x.sup_norm() != S::one() {
                return Err(Error::Precondition(format!(
                    "{name} must be positive with sup norm 1"
                )));
            }
        }
        let m0_star = first_argmax(&m0);
        let n0_star = first_argmax(&n0);
        Ok(Self {
            domain,
            codomain,
            u,
            v,
            m0,
            n0,
            m0_star,
            n0_star,
        })
    }

    /// `x₀ = m₀ ⊕ 0`.
    pub fn start_point(&self) -> LatticeVector<S> {
        self.domain
            .join(&self.m0, &LatticeVector::zeros(self.domain.dim_n))
            .expect("block dimensions match")
    }

    /// `0 ⊕ n₀`.
    pub fn n0_embedded(&self) -> LatticeVector<S> {
        self.domain
            .join(&LatticeVector::zeros(self.domain.dim_m), &self.n0)
            .expect("block dimensions match")
    }
}

/// The matrix of `S(x) = m₀*(Px)(v − u) + n₀*(Qx)u`: column `m0_star` is
/// `v − u`, column `dim_m + n0_star` is `u`, the rest are zero.
pub fn build_converse_operator<S: Scalar>(
    inst: &ConverseInstance<S>,
) -> Result<PositiveOperator<S>> {
    let rows = inst.codomain.dim();
    let mut m = Matrix::zeros(rows, inst.domain.dim());
    let vu = inst.v.sub(&inst.u)?;
    for i in 0..rows {
        m.set(i, inst.m0_star, vu[i].clone());
        m.set(i, inst.domain.dim_m + inst.n0_star, inst.u[i].clone());
    }
    PositiveOperator::new(m, inst.codomain.clone())
}

/// Given `T` attaining its norm at `x₁ = m + n` with `‖n‖ < 1`, returns
/// `m ⊕ 0`, at which `T` also attains its norm.
pub fn extract_m_attainment<S: Scalar>(
    t: &PositiveOperator<S>,
    domain: &InftySumDomain,
    x1: &LatticeVector<S>,
    tol: Option<f64>,
) -> Result<LatticeVector<S>> {
    domain.check(x1)?;
    let tol = tol.map_or_else(S::default_tol, S::lift);
    let sup = x1.sup_norm();
    if (sup.clone() - S::one()).abs() > tol {
        return Err(Error::NotUnitPoint(sup.approx()));
    }
    let norm = t.norm();
    let at_x1 = t.norm_at(x1);
    if (at_x1.clone() - norm.clone()).abs() > tol {
        return Err(Error::Precondition(format!(
            "T does not attain its norm at x1: {} vs {}",
            at_x1.approx(),
            norm.approx()
        )));
    }
    let qn = domain.project_n(x1).sup_norm();
    if qn >= S::one() {
        return Err(Error::Precondition(format!(
            "‖Q x1‖ < 1 fails: ‖Q x1‖ = {}",
            qn.approx()
        )));
    }
    let m = domain.project_m(x1);
    let at_m = t.norm_at(&m);
    if (at_m.clone() - norm.clone()).abs() > tol {
        return Err(Error::LedgerViolation {
            check: "m_block_attains".into(),
            lhs: at_m.approx(),
            rhs: norm.approx(),
        });
    }
    Ok(m)
}

/// One row of the necessity experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseRow {
    pub u_norm: f64,
    pub epsilon: f64,
    /// `‖S(m₀)‖ = ‖v − u‖`.
    pub s_m0_norm: f64,
    pub eta_definition: f64,
    /// Whether `‖S x₀‖ > 1 − eta_definition`.
    pub precond_met: bool,
    /// `‖S − T‖` for the certificate the correction produced.
    pub dist_ops: f64,
    pub dist_points: f64,
    /// Largest entry of `T(n₀)`.
    pub tn0_max: f64,
    pub tn0_vanishes: bool,
    /// `‖S − T‖ ≥ ‖u‖ − BOUND_TOL`.
    pub bound_holds: bool,
    /// Whether the produced certificate would satisfy `‖S − T‖ < ε`.
    pub within_epsilon: bool,
    /// `u = 0`: the bound is trivial.
    pub vacuous: bool,
    /// `‖T m‖ = ‖T‖` for the extracted `M` part.
    pub m_attains: bool,
    pub ledger_ok: bool,
    pub alternatives_tried: usize,
    /// Smallest `‖S − T′‖` over the random alternatives, if any were tried.
    pub best_alternative: Option<f64>,
}

impl ConverseRow {
    /// The row is consistent with the lower bound.
    pub fn passes(&self) -> bool {
        self.tn0_vanishes && (self.vacuous || self.bound_holds) && self.m_attains
    }
}

/// Runs the correction on the adversarial operator of `inst` and measures
/// the lower bound. Precondition failures are reported in the row, not
/// raised: the construction is run in recording mode either way.
///
/// `alternatives` random certificates `T′ = (T + ξ)/‖T + ξ‖`, with `ξ ≥ 0`
/// supported on the columns where `u₀ = 1`, are also scored; each still
/// attains its norm at `u₀`, so the smallest `‖S − T′‖` is an exploratory
/// probe for cheaper certificates.
pub fn necessity_experiment(
    inst: &ConverseInstance<f64>,
    epsilon: f64,
    modulus: &Modulus,
    alternatives: usize,
    seed: u64,
) -> Result<ConverseRow> {
    let s = build_converse_operator(inst)?;
    let x0 = inst.start_point();
    let options = SolveOptions {
        policy: Policy::Record,
        ..SolveOptions::default()
    };
    let solver = Solver::new(epsilon, modulus, options)?;
    let cert = solver.linfty(&s, &x0)?;
    let lifted = positivity_lift(&cert, &x0, None)?;
    let m_attains = extract_m_attainment(&lifted.t, &inst.domain, &lifted.u0, Some(1e-9)).is_ok();

    let tn0 = lifted.t.apply(&inst.n0_embedded());
    let tn0_max = tn0.entries().iter().cloned().fold(0.0, f64::max);
    let u_norm = inst.codomain.norm_of(&inst.u);
    let dist_ops = exact_distance(&s, &lifted.t, options.n_max)?;
    let best_alternative = if alternatives > 0 {
        Some(search_alternatives(
            &s,
            &lifted,
            alternatives,
            seed,
            options.n_max,
        )?)
    } else {
        None
    };
    Ok(ConverseRow {
        u_norm,
        epsilon,
        s_m0_norm: s.norm_at(&x0),
        eta_definition: cert.budget.eta_definition,
        precond_met: cert.precondition_met,
        dist_ops,
        dist_points: lifted.measured.dist_points,
        tn0_max,
        tn0_vanishes: tn0_max <= TN0_TOL,
        bound_holds: dist_ops >= u_norm - BOUND_TOL,
        within_epsilon: dist_ops < epsilon,
        vacuous: u_norm == 0.0,
        m_attains,
        ledger_ok: cert.ledger_ok(),
        alternatives_tried: alternatives,
        best_alternative,
    })
}

fn exact_distance(
    s: &PositiveOperator<f64>,
    t: &PositiveOperator<f64>,
    n_max: usize,
) -> Result<f64> {
    operator_norm_general(&t.matrix().sub(s.matrix())?, s.codomain(), n_max)
}

fn search_alternatives(
    s: &PositiveOperator<f64>,
    cert: &BpbCertificate<f64>,
    count: usize,
    seed: u64,
    n_max: usize,
) -> Result<f64> {
    let mut rng = instance_rng(seed, u64::MAX);
    let t = cert.t.matrix();
    let ones: Vec<bool> = cert.u0.entries().iter().map(|&x| x == 1.0).collect();
    let mut best = f64::INFINITY;
    for _ in 0..count {
        let scale: f64 = rng.gen_range(0.0..0.5);
        let mut m = t.clone();
        for i in 0..m.rows() {
            for (j, &on) in ones.iter().enumerate() {
                if on {
                    let bump: f64 = rng.gen_range(0.0..1.0);
                    m.set(i, j, m.get(i, j) + scale * bump);
                }
            }
        }
        let cand = PositiveOperator::new(m, s.codomain().clone())?;
        let cand = cand.scaled(&(1.0 / cand.norm()))?;
        best = best.min(exact_distance(s, &cand, n_max)?);
    }
    Ok(best)
}

/// Runs [`necessity_experiment`] for each `(instance, ε)` pair in order.
pub fn sweep(
    cases: &[(ConverseInstance<f64>, f64)],
    modulus: &Modulus,
    alternatives: usize,
    seed: u64,
) -> Result<Vec<ConverseRow>> {
    cases
        .iter()
        .enumerate()
        .map(|(k, (inst, eps))| {
            necessity_experiment(
                inst,
                *eps,
                modulus,
                alternatives,
                seed.wrapping_add(k as u64),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::converse_instance;

    fn l1_instance(u: [f64; 2]) -> ConverseInstance<f64> {
        let v = LatticeVector::from_f64(&[0.5, 0.5]).unwrap();
        ConverseInstance::new(
            InftySumDomain::new(1, 1).unwrap(),
            NormedLattice::l1(2),
            LatticeVector::from_f64(&u).unwrap(),
            v,
            LatticeVector::from_f64(&[1.0]).unwrap(),
            LatticeVector::from_f64(&[1.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn adversarial_operator_columns() {
        let inst = l1_instance([0.3, 0.0]);
        let s = build_converse_operator(&inst).unwrap();
        assert_eq!(s.matrix().column(0), vec![0.2, 0.5]);
        assert_eq!(s.matrix().column(1), vec![0.3, 0.0]);
        assert_eq!(s.norm(), 1.0);
        assert!((s.norm_at(&inst.start_point()) - 0.7).abs() < 1e-15);
        let sum = s.apply(&LatticeVector::from_f64(&[1.0, 1.0]).unwrap());
        assert_eq!(sum, inst.v);
    }

    #[test]
    fn edge_cases_of_u() {
        let zero = build_converse_operator(&l1_instance([0.0, 0.0])).unwrap();
        assert!(zero.matrix().column(1).iter().all(|&x| x == 0.0));
        assert_eq!(
            zero.norm_at(&LatticeVector::from_f64(&[1.0, 0.0]).unwrap()),
            1.0
        );
        let full = build_converse_operator(&l1_instance([0.5, 0.5])).unwrap();
        assert_eq!(
            full.norm_at(&LatticeVector::from_f64(&[1.0, 0.0]).unwrap()),
            0.0
        );
    }

    #[test]
    fn invalid_instances_are_refused() {
        let bad = ConverseInstance::new(
            InftySumDomain::new(1, 1).unwrap(),
            NormedLattice::<f64>::l1(2),
            LatticeVector::from_f64(&[0.6, 0.0]).unwrap(),
            LatticeVector::from_f64(&[0.5, 0.5]).unwrap(),
            LatticeVector::from_f64(&[1.0]).unwrap(),
            LatticeVector::from_f64(&[1.0]).unwrap(),
        );
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }

    #[test]
    fn extraction_drops_the_n_block() {
        let d = InftySumDomain::new(2, 2).unwrap();
        let t = PositiveOperator::new(
            Matrix::<f64>::from_rows(&[vec![0.3, 0.2, 0.0, 0.0], vec![0.1, 0.4, 0.0, 0.0]])
                .unwrap(),
            NormedLattice::l1(2),
        )
        .unwrap();
        let x1 = LatticeVector::from_f64(&[1.0, 1.0, 0.5, -0.5]).unwrap();
        let m = extract_m_attainment(&t, &d, &x1, None).unwrap();
        assert_eq!(m.to_f64(), vec![1.0, 1.0, 0.0, 0.0]);
        let only_m = LatticeVector::from_f64(&[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(extract_m_attainment(&t, &d, &only_m, None).unwrap(), only_m);
        let full_n = LatticeVector::from_f64(&[1.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(matches!(
            extract_m_attainment(&t, &d, &full_n, None),
            Err(Error::Precondition(ref m)) if m.contains("Q x1")
        ));
    }

    #[test]
    fn experiment_on_the_small_example() {
        let inst = l1_instance([0.3, 0.0]);
        let row = necessity_experiment(&inst, 0.5, &Modulus::l1(), 0, 0).unwrap();
        assert!(!row.precond_met);
        assert_eq!(row.tn0_max, 0.0);
        assert!(row.bound_holds && row.dist_ops >= 0.3 - 1e-12);
        assert!(row.passes());

        let trivial =
            necessity_experiment(&l1_instance([0.0, 0.0]), 0.5, &Modulus::l1(), 0, 0).unwrap();
        assert!(trivial.vacuous && trivial.passes());
        assert!(trivial.precond_met);
        assert_eq!(trivial.dist_ops, 0.0);
    }

    #[test]
    fn sweep_charts_the_lower_bound() {
        let lat = NormedLattice::lp(2, 2.0).unwrap();
        let cases: Vec<_> = (1..=9)
            .map(|k| {
                let u = k as f64 / 10.0;
                let inst = converse_instance(&mut instance_rng(11, k), 2, 2, &lat, u).unwrap();
                (inst, u * 0.9)
            })
            .collect();
        let rows = sweep(&cases, &Modulus::lp(2.0), 20, 1).unwrap();
        for row in &rows {
            assert!(row.passes(), "{row:?}");
            assert!(!row.within_epsilon, "{row:?}");
            assert!(row.best_alternative.unwrap() >= row.u_norm - BOUND_TOL);
        }
    }
}
