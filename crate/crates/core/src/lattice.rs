//! Finite-dimensional Banach function lattices.
//!
//! `ℝⁿ` with the coordinatewise order models a function space over the
//! atomic measure space `{0, …, n-1}`; every shipped norm is a lattice norm,
//! i.e. `|x| ≤ |y|` coordinatewise implies `‖x‖ ≤ ‖y‖`.

use std::fmt;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monotonicity::Modulus;
use crate::scalar::Scalar;

/// An element of `ℝⁿ` ordered coordinatewise.
///
/// The support is computed at exact zero, so constructions that need
/// disjoint supports must write literal zeros rather than rely on
/// cancellation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticeVector<S> {
    entries: Vec<S>,
}

impl<S: Scalar> LatticeVector<S> {
    pub fn new(entries: Vec<S>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyDimension);
        }
        if let Some(i) = entries.iter().position(|e| !e.is_finite_value()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { entries })
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Self::new(values.iter().map(|&v| S::lift(v)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            entries: vec![S::zero(); dim],
        }
    }

    /// The constant vector `𝟙`.
    pub fn ones(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            entries: vec![S::one(); dim],
        }
    }

    /// Indicator `χ_A` of the coordinates where `mask` is set.
    pub fn indicator(mask: &[bool]) -> Self {
        assert!(!mask.is_empty(), "dimension must be positive");
        Self {
            entries: mask
                .iter()
                .map(|&b| if b { S::one() } else { S::zero() })
                .collect(),
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[k] = S::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<S> {
        self.entries
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(Scalar::approx).collect()
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> LatticeVector<T> {
        LatticeVector {
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Indices of nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn support_mask(&self) -> Vec<bool> {
        self.entries.iter().map(|e| !e.is_zero()).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().all(|e| !e.is_negative())
    }

    /// `‖x‖_∞`, the norm of the domain spaces.
    pub fn sup_norm(&self) -> S {
        self.entries
            .iter()
            .fold(S::zero(), |acc, e| S::max_of(acc, e.abs()))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    /// `x ∧ y`.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| S::min_of(a.clone(), b.clone()))
    }

    /// `x ∨ y`.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| S::max_of(a.clone(), b.clone()))
    }

    pub fn abs(&self) -> Self {
        Self {
            entries: self.entries.iter().map(Signed::abs).collect(),
        }
    }

    /// `x⁺ = x ∨ 0`.
    pub fn pos_part(&self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| S::max_of(e.clone(), S::zero()))
                .collect(),
        }
    }

    /// `x⁻ = (−x) ∨ 0`.
    pub fn neg_part(&self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| S::max_of(-e.clone(), S::zero()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| e.clone() * factor.clone())
                .collect(),
        }
    }

    /// Coordinatewise product with the indicator of `mask`; excluded
    /// coordinates become an exact zero.
    pub fn restrict(&self, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), self.dim(), "mask length");
        Self {
            entries: self
                .entries
                .iter()
                .zip(mask)
                .map(|(e, &keep)| if keep { e.clone() } else { S::zero() })
                .collect(),
        }
    }

    /// `x ≤ y` coordinatewise.
    pub fn le(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b)
    }
}

impl<S: Scalar> std::ops::Index<usize> for LatticeVector<S> {
    type Output = S;

    fn index(&self, i: usize) -> &S {
        &self.entries[i]
    }
}

/// The lattice operations of a pair, computed together.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeOps<S> {
    pub meet: LatticeVector<S>,
    pub join: LatticeVector<S>,
    pub abs: LatticeVector<S>,
    pub pos_part: LatticeVector<S>,
    pub neg_part: LatticeVector<S>,
}

pub fn lattice_ops<S: Scalar>(x: &LatticeVector<S>, y: &LatticeVector<S>) -> Result<LatticeOps<S>> {
    Ok(LatticeOps {
        meet: x.meet(y)?,
        join: x.join(y)?,
        abs: x.abs(),
        pos_part: x.pos_part(),
        neg_part: x.neg_part(),
    })
}

/// Which lattice norm a [`MonotoneNorm`] evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NormFamily<S> {
    L1,
    /// `ℓ_p` for `1 ≤ p < ∞`.
    Lp(f64),
    /// `Σ wᵢ |xᵢ|` with all `wᵢ > 0`.
    WeightedL1(Vec<S>),
    Sup,
}

impl<S: Scalar> NormFamily<S> {
    pub fn name(&self) -> String {
        match self {
            NormFamily::L1 => "l1".to_string(),
            NormFamily::Lp(p) => format!("l{p}"),
            NormFamily::WeightedL1(_) => "weighted_l1".to_string(),
            NormFamily::Sup => "sup".to_string(),
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> NormFamily<T> {
        match self {
            NormFamily::L1 => NormFamily::L1,
            NormFamily::Lp(p) => NormFamily::Lp(*p),
            NormFamily::WeightedL1(w) => NormFamily::WeightedL1(w.iter().map(f).collect()),
            NormFamily::Sup => NormFamily::Sup,
        }
    }
}

/// A lattice norm on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneNorm<S> {
    family: NormFamily<S>,
}

impl<S: Scalar> MonotoneNorm<S> {
    pub fn new(family: NormFamily<S>) -> Result<Self> {
        match &family {
            NormFamily::Lp(p) => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::InvalidExponent(*p));
                }
                if S::EXACT {
                    return Err(Error::InexactNorm(family.name()));
                }
            }
            NormFamily::WeightedL1(w) => {
                if w.is_empty() {
                    return Err(Error::EmptyDimension);
                }
                if let Some(i) = w
                    .iter()
                    .position(|x| !(*x > S::zero() && x.is_finite_value()))
                {
                    return Err(Error::InvalidWeight(i));
                }
            }
            NormFamily::L1 | NormFamily::Sup => {}
        }
        Ok(Self { family })
    }

    pub fn l1() -> Self {
        Self {
            family: NormFamily::L1,
        }
    }

    pub fn sup() -> Self {
        Self {
            family: NormFamily::Sup,
        }
    }

    pub fn lp(p: f64) -> Result<Self> {
        Self::new(NormFamily::Lp(p))
    }

    pub fn weighted_l1(weights: Vec<S>) -> Result<Self> {
        Self::new(NormFamily::WeightedL1(weights))
    }

    pub fn family(&self) -> &NormFamily<S> {
        &self.family
    }

    pub fn name(&self) -> String {
        self.family.name()
    }

    /// The dimension this norm is tied to, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match &self.family {
            NormFamily::WeightedL1(w) => Some(w.len()),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[S]) -> S {
        match &self.family {
            NormFamily::L1 => x.iter().fold(S::zero(), |acc, e| acc + e.abs()),
            NormFamily::WeightedL1(w) => x
                .iter()
                .zip(w)
                .fold(S::zero(), |acc, (e, wi)| acc + wi.clone() * e.abs()),
            NormFamily::Sup => x.iter().fold(S::zero(), |acc, e| S::max_of(acc, e.abs())),
            NormFamily::Lp(p) => {
                // Scale by the largest magnitude to keep powers in range.
                let big = x.iter().fold(S::zero(), |acc, e| S::max_of(acc, e.abs()));
                if big.is_zero() {
                    return S::zero();
                }
                let sum = x.iter().fold(S::zero(), |acc, e| {
                    acc + (e.clone() / big.clone()).abs_powf(*p)
                });
                big * sum.root(*p)
            }
        }
    }

    /// A modulus of uniform monotonicity valid for this norm in every dimension,
    /// when one is known in closed form.
    pub fn analytic_modulus(&self) -> Option<Modulus> {
        match &self.family {
            NormFamily::L1 | NormFamily::WeightedL1(_) => Some(Modulus::l1()),
            NormFamily::Lp(p) => Some(Modulus::lp(*p)),
            NormFamily::Sup => None,
        }
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<MonotoneNorm<T>> {
        MonotoneNorm::new(self.family.map_scalar(f))
    }
}

impl<S: Scalar> fmt::Display for MonotoneNorm<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `(ℝᵐ, ‖·‖)`: the codomain of the operators.
#[derive(Debug, Clone, PartialEq)]
pub struct NormedLattice<S> {
    dim: usize,
    norm: MonotoneNorm<S>,
}

impl<S: Scalar> NormedLattice<S> {
    pub fn new(dim: usize, norm: MonotoneNorm<S>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        if let Some(d) = norm.fixed_dim() {
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        Ok(Self { dim, norm })
    }

    pub fn l1(dim: usize) -> Self {
        Self::new(dim, MonotoneNorm::l1()).expect("positive dimension")
    }

    pub fn sup(dim: usize) -> Self {
        Self::new(dim, MonotoneNorm::sup()).expect("positive dimension")
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        Self::new(dim, MonotoneNorm::lp(p)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> &MonotoneNorm<S> {
        &self.norm
    }

    /// Norm of `x`. Panics on a dimension mismatch.
    pub fn norm_of(&self, x: &LatticeVector<S>) -> S {
        assert_eq!(x.dim(), self.dim, "vector dimension does not match lattice");
        self.norm.eval(x.entries())
    }

    pub fn try_norm_of(&self, x: &LatticeVector<S>) -> Result<S> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        Ok(self.norm.eval(x.entries()))
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Result<NormedLattice<T>> {
        NormedLattice::new(self.dim, self.norm.map_scalar(f)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> LatticeVector<f64> {
        LatticeVector::from_f64(x).unwrap()
    }

    #[test]
    fn lattice_ops_examples() {
        let ops = lattice_ops(&v(&[1.0, -2.0]), &v(&[0.0, 3.0])).unwrap();
        assert_eq!(ops.meet, v(&[0.0, -2.0]));
        assert_eq!(ops.join, v(&[1.0, 3.0]));
        assert_eq!(ops.abs, v(&[1.0, 2.0]));

        let x = v(&[-1.0, 0.0, 2.0]);
        assert_eq!(x.pos_part(), v(&[0.0, 0.0, 2.0]));
        assert_eq!(x.neg_part(), v(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = lattice_ops(&v(&[1.0]), &v(&[1.0, 2.0])).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(
            LatticeVector::<f64>::new(vec![]),
            Err(Error::EmptyDimension)
        );
        assert_eq!(
            LatticeVector::<f64>::from_f64(&[1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        );
        assert_eq!(
            MonotoneNorm::<f64>::weighted_l1(vec![1.0, 0.0]),
            Err(Error::InvalidWeight(1))
        );
        assert_eq!(
            MonotoneNorm::<f64>::lp(0.5),
            Err(Error::InvalidExponent(0.5))
        );
        assert!(matches!(
            MonotoneNorm::<BigRational>::lp(2.0),
            Err(Error::InexactNorm(_))
        ));
        assert!(NormedLattice::new(3, MonotoneNorm::weighted_l1(vec![1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn support_is_exact() {
        let x = v(&[0.0, -0.0, 1e-300, 2.0]);
        assert_eq!(x.support(), vec![2, 3]);
    }

    #[test]
    fn norm_values() {
        let x = v(&[3.0, -4.0]);
        assert_eq!(MonotoneNorm::l1().eval(x.entries()), 7.0);
        assert_eq!(MonotoneNorm::sup().eval(x.entries()), 4.0);
        assert!((MonotoneNorm::lp(2.0).unwrap().eval(x.entries()) - 5.0).abs() < 1e-15);
        let w = MonotoneNorm::weighted_l1(vec![2.0, 0.5]).unwrap();
        assert_eq!(w.eval(x.entries()), 8.0);
        // huge entries do not overflow
        let big = v(&[1e200, 1e200]);
        let n = MonotoneNorm::lp(4.0).unwrap().eval(big.entries());
        assert!((n / 1e200 - 2f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn rational_norms_are_exact() {
        let x = LatticeVector::new(vec![ratio(1, 3), ratio(-1, 6)]).unwrap();
        assert_eq!(MonotoneNorm::l1().eval(x.entries()), ratio(1, 2));
        let w = MonotoneNorm::weighted_l1(vec![ratio(3, 1), ratio(6, 1)]).unwrap();
        assert_eq!(w.eval(x.entries()), ratio(2, 1));
    }

    fn families() -> Vec<MonotoneNorm<f64>> {
        vec![
            MonotoneNorm::l1(),
            MonotoneNorm::lp(2.0).unwrap(),
            MonotoneNorm::lp(4.0).unwrap(),
            MonotoneNorm::lp(1.5).unwrap(),
            MonotoneNorm::weighted_l1(vec![0.5, 1.0, 2.0, 3.0]).unwrap(),
            MonotoneNorm::sup(),
        ]
    }

    fn vec4() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn lattice_norm_axiom(x in vec4(), shrink in prop::collection::vec(0.0f64..=1.0, 4)) {
            // |x'| ≤ |x| coordinatewise by construction.
            let smaller: Vec<f64> = x.iter().zip(&shrink).map(|(a, s)| a * s).collect();
            for norm in families() {
                prop_assert!(norm.eval(&smaller) <= norm.eval(&x) * (1.0 + 1e-12) + 1e-300);
            }
        }

        #[test]
        fn homogeneity_and_triangle(x in vec4(), y in vec4(), lambda in -5.0f64..5.0) {
            for norm in families() {
                let nx = norm.eval(&x);
                let scaled: Vec<f64> = x.iter().map(|a| lambda * a).collect();
                prop_assert!((norm.eval(&scaled) - lambda.abs() * nx).abs() <= 1e-12 * (1.0 + nx * lambda.abs()));
                let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
                prop_assert!(norm.eval(&sum) <= nx + norm.eval(&y) + 1e-12 * (1.0 + nx));
            }
        }

        #[test]
        fn riesz_identities_are_exact(x in vec4()) {
            let x = v(&x);
            let recon = x.pos_part().sub(&x.neg_part()).unwrap();
            prop_assert_eq!(recon, x.clone());
            let mag = x.pos_part().add(&x.neg_part()).unwrap();
            prop_assert_eq!(mag, x.abs());
        }

        #[test]
        fn definiteness(x in vec4()) {
            for norm in families() {
                let zero = x.iter().all(|a| *a == 0.0);
                prop_assert_eq!(norm.eval(&x) == 0.0, zero);
            }
        }
    }
}
