//! Replacing two positive vectors by nearby vectors with disjoint supports.

use crate::bpb::ledger::{Ledger, Relation};
use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, NormedLattice};
use crate::monotonicity::Modulus;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome<S> {
    pub h1: LatticeVector<S>,
    pub h2: LatticeVector<S>,
    /// `f₁` restricted to `C₁ = {f₂ ≤ f₁}`.
    pub g1: LatticeVector<S>,
    /// `f₂` restricted to `C₂ = {f₁ < f₂}`.
    pub g2: LatticeVector<S>,
    /// Membership in `C₁`; ties go here.
    pub first_side: Vec<bool>,
    /// `‖2(f₁χ_{C₂} + f₂χ_{C₁})‖`, the part of `f₁ + f₂` not seen by `|f₁ − f₂|`.
    pub overlap_norm: S,
    pub g_sum_norm: S,
    pub ledger: Ledger,
}

fn check_inputs<S: Scalar>(
    f1: &LatticeVector<S>,
    f2: &LatticeVector<S>,
    lattice: &NormedLattice<S>,
) -> Result<()> {
    for f in [f1, f2] {
        if f.dim() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                expected: lattice.dim(),
                found: f.dim(),
            });
        }
        if !f.is_nonnegative() {
            return Err(Error::Precondition("split inputs must be positive".into()));
        }
    }
    Ok(())
}

/// Runs the splitting construction and records every bound it is expected
/// to satisfy, without rejecting inputs that miss the hypotheses.
///
/// `C₁ = {t : f₂(t) ≤ f₁(t)}`, `gᵢ = fᵢ·χ_{Cᵢ}` and `hᵢ = gᵢ/‖g₁ + g₂‖`.
/// Fails only when `g₁ + g₂ = 0`, i.e. `f₁ = f₂ = 0`.
pub fn split_construction<S: Scalar>(
    f1: &LatticeVector<S>,
    f2: &LatticeVector<S>,
    epsilon: f64,
    lattice: &NormedLattice<S>,
    modulus: &Modulus,
    tol: &S,
) -> Result<SplitOutcome<S>> {
    check_inputs(f1, f2, lattice)?;
    let mut ledger = Ledger::new();
    let one = S::one();
    let eps = S::lift(epsilon);
    let third = eps.clone() / S::of_usize(3);
    let sixth = eps.clone() / S::of_usize(6);
    let separation = one.clone() / (one.clone() + S::lift(modulus.eval(epsilon / 3.0)));

    let sum = f1.add(f2)?;
    let diff = f1.sub(f2)?;
    ledger.record(
        "sum_in_unit_ball",
        &lattice.norm_of(&sum),
        Relation::Le,
        &one,
        tol,
    );
    ledger.record(
        "difference_separated",
        &lattice.norm_of(&diff),
        Relation::Ge,
        &separation,
        tol,
    );

    let first_side: Vec<bool> = f1
        .entries()
        .iter()
        .zip(f2.entries())
        .map(|(a, b)| b <= a)
        .collect();
    let second_side: Vec<bool> = first_side.iter().map(|s| !s).collect();

    let g1 = f1.restrict(&first_side);
    let g2 = f2.restrict(&second_side);
    let leftover = f1.restrict(&second_side).add(&f2.restrict(&first_side))?;
    let overlap_norm = lattice.norm_of(&leftover.scale(&S::two()));
    ledger.record("overlap_small", &overlap_norm, Relation::Le, &third, tol);
    ledger.record(
        "first_restriction_close",
        &lattice.norm_of(&g1.sub(f1)?),
        Relation::Le,
        &sixth,
        tol,
    );
    ledger.record(
        "second_restriction_close",
        &lattice.norm_of(&g2.sub(f2)?),
        Relation::Le,
        &sixth,
        tol,
    );

    let g_sum = g1.add(&g2)?;
    let g_sum_norm = lattice.norm_of(&g_sum);
    if g_sum_norm.is_zero() {
        return Err(Error::Degenerate("both split inputs vanish"));
    }
    ledger.record(
        "restricted_sum_lower_bound",
        &g_sum_norm,
        Relation::Ge,
        &(separation - third),
        tol,
    );

    let inv = one.clone() / g_sum_norm.clone();
    let h1 = g1.scale(&inv);
    let h2 = g2.scale(&inv);
    let two_thirds = eps.clone() * S::two() / S::of_usize(3);
    ledger.record(
        "first_rescale_close",
        &lattice.norm_of(&h1.sub(&g1)?),
        Relation::Lt,
        &two_thirds,
        tol,
    );
    ledger.record(
        "second_rescale_close",
        &lattice.norm_of(&h2.sub(&g2)?),
        Relation::Lt,
        &two_thirds,
        tol,
    );

    let disjoint = h1
        .entries()
        .iter()
        .zip(h2.entries())
        .all(|(a, b)| a.is_zero() || b.is_zero());
    ledger.record_bool("disjoint_supports", disjoint);
    ledger.record(
        "unit_sum",
        &lattice.norm_of(&h1.add(&h2)?),
        Relation::Eq,
        &one,
        tol,
    );
    ledger.record(
        "first_close",
        &lattice.norm_of(&h1.sub(f1)?),
        Relation::Lt,
        &eps,
        tol,
    );
    ledger.record(
        "second_close",
        &lattice.norm_of(&h2.sub(f2)?),
        Relation::Lt,
        &eps,
        tol,
    );

    Ok(SplitOutcome {
        h1,
        h2,
        g1,
        g2,
        first_side,
        overlap_norm,
        g_sum_norm,
        ledger,
    })
}

/// Positive `h₁, h₂` with disjoint supports, `‖h₁ + h₂‖ = 1` and
/// `‖hᵢ − fᵢ‖ < ε`, for positive `f₁, f₂` with `‖f₁ + f₂‖ ≤ 1` and
/// `‖f₁ − f₂‖ ≥ 1/(1 + δ(ε/3))`.
///
/// Hypothesis failures are reported as [`Error::Precondition`]; a failed
/// conclusion is an [`Error::LedgerViolation`].
pub fn disjoint_support_split<S: Scalar>(
    f1: &LatticeVector<S>,
    f2: &LatticeVector<S>,
    epsilon: f64,
    lattice: &NormedLattice<S>,
    modulus: &Modulus,
    tol: &S,
) -> Result<SplitOutcome<S>> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    check_inputs(f1, f2, lattice)?;
    let one = S::one();
    let separation = one.clone() / (one.clone() + S::lift(modulus.eval(epsilon / 3.0)));
    let diff_norm = lattice.norm_of(&f1.sub(f2)?);
    if diff_norm < separation.clone() - tol.clone() {
        return Err(Error::Precondition(format!(
            "‖f1 − f2‖ ≥ 1/(1 + δ(ε/3)) fails: {} < {}",
            diff_norm.approx(),
            separation.approx()
        )));
    }
    let sum_norm = lattice.norm_of(&f1.add(f2)?);
    if sum_norm > one + tol.clone() {
        return Err(Error::Precondition(format!(
            "‖f1 + f2‖ ≤ 1 fails: ‖f1 + f2‖ = {}",
            sum_norm.approx()
        )));
    }
    let out = split_construction(f1, f2, epsilon, lattice, modulus, tol)?;
    match out.ledger.first_violation() {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::Rational;

    fn v(x: &[f64]) -> LatticeVector<f64> {
        LatticeVector::from_f64(x).unwrap()
    }

    #[test]
    fn disjoint_inputs_are_fixed() {
        let l = NormedLattice::l1(2);
        let out = disjoint_support_split(
            &v(&[0.6, 0.0]),
            &v(&[0.0, 0.4]),
            0.5,
            &l,
            &Modulus::l1(),
            &1e-9,
        )
        .unwrap();
        assert_eq!(out.h1, v(&[0.6, 0.0]));
        assert_eq!(out.h2, v(&[0.0, 0.4]));
        assert_eq!(out.g_sum_norm, 1.0);
    }

    #[test]
    fn overlapping_example_in_exact_arithmetic() {
        // f1 = (7/10, 1/20), f2 = (1/20, 1/5), ε = 4/5
        let l = NormedLattice::<Rational>::l1(2);
        let f1 = LatticeVector::new(vec![ratio(7, 10), ratio(1, 20)]).unwrap();
        let f2 = LatticeVector::new(vec![ratio(1, 20), ratio(1, 5)]).unwrap();
        // hypothesis by hand: ‖f1 − f2‖ = 4/5 ≥ 1/(1 + 4/15) = 15/19
        assert!(ratio(4, 5) >= ratio(15, 19));
        let zero = ratio(0, 1);
        let out = disjoint_support_split(&f1, &f2, 0.8, &l, &Modulus::l1(), &zero).unwrap();
        assert_eq!(out.first_side, vec![true, false]);
        assert_eq!(out.g1.entries(), &[ratio(7, 10), ratio(0, 1)]);
        assert_eq!(out.g2.entries(), &[ratio(0, 1), ratio(1, 5)]);
        assert_eq!(out.g_sum_norm, ratio(9, 10));
        assert_eq!(out.h1.entries(), &[ratio(7, 9), ratio(0, 1)]);
        assert_eq!(out.h2.entries(), &[ratio(0, 1), ratio(2, 9)]);
        let d1 = l.norm_of(&out.h1.sub(&f1).unwrap());
        assert_eq!(d1, ratio(7, 90) + ratio(1, 20));
        assert!(d1 < ratio(4, 5));
        assert_eq!(out.overlap_norm, ratio(1, 5));
        assert!(out.ledger.all_hold());
    }

    #[test]
    fn ties_go_to_first_side() {
        let l = NormedLattice::l1(3);
        let out = split_construction(
            &v(&[0.5, 0.0, 0.0]),
            &v(&[0.0, 0.0, 0.5]),
            0.5,
            &l,
            &Modulus::l1(),
            &1e-9,
        )
        .unwrap();
        // coordinate 1 has f1 = f2 = 0
        assert_eq!(out.first_side, vec![true, true, false]);
    }

    #[test]
    fn equal_inputs_fail_the_hypothesis() {
        let l = NormedLattice::l1(2);
        let f = v(&[0.3, 0.3]);
        match disjoint_support_split(&f, &f, 0.5, &l, &Modulus::l1(), &1e-9) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("f1 − f2"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn oversized_sum_and_negative_inputs() {
        let l = NormedLattice::l1(2);
        let err = disjoint_support_split(
            &v(&[0.9, 0.0]),
            &v(&[0.0, 0.9]),
            0.5,
            &l,
            &Modulus::l1(),
            &1e-9,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(ref m) if m.contains("f1 + f2")));
        assert!(disjoint_support_split(
            &v(&[-0.1, 0.0]),
            &v(&[0.0, 0.9]),
            0.5,
            &l,
            &Modulus::l1(),
            &1e-9
        )
        .is_err());
    }

    #[test]
    fn zero_inputs_are_degenerate() {
        let l = NormedLattice::l1(2);
        let z = v(&[0.0, 0.0]);
        assert_eq!(
            split_construction(&z, &z, 0.5, &l, &Modulus::l1(), &1e-9).unwrap_err(),
            Error::Degenerate("both split inputs vanish")
        );
    }
}
