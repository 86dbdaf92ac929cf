//! Constructive Bishop–Phelps–Bollobás corrections for positive operators.
//!
//! Given a positive norm-one operator `S` from a sup-norm space `(ℝⁿ, ‖·‖_∞)`
//! into a uniformly monotone lattice `(ℝᵐ, ‖·‖)` and a unit vector `x₀` at
//! which `S` nearly attains its norm, [`bpb::bpb_correct_linfty`] builds a
//! positive operator `T` and a point `u₀` with `‖T(u₀)‖ = ‖T‖ = 1`,
//! `‖T − S‖ < ε` and `‖u₀ − x₀‖ < ε`, recording every intermediate
//! inequality of the construction in a [`bpb::Ledger`].
//!
//! Everything numeric is generic over [`Scalar`]; `f64` is the working type
//! and [`Rational`] gives exact certificates for the `ℓ₁`, weighted `ℓ₁` and
//! sup norms.

pub mod bpb;
pub mod converse;
pub mod error;
pub mod instances;
pub mod lattice;
pub mod monotonicity;
pub mod operator;
pub mod scalar;

pub use error::{Error, Result};
pub use lattice::{
    lattice_ops, LatticeOps, LatticeVector, MonotoneNorm, NormFamily, NormedLattice,
};
pub use monotonicity::{Form, Modulus};
pub use operator::{
    operator_norm_general, operator_norm_positive, Matrix, PositiveOperator, DEFAULT_N_MAX,
};
pub use scalar::Scalar;

/// Exact arbitrary-precision rationals.
pub type Rational = num_rational::BigRational;

pub type Vector = LatticeVector<f64>;
pub type RationalVector = LatticeVector<Rational>;
pub type Operator = PositiveOperator<f64>;
pub type RationalOperator = PositiveOperator<Rational>;
pub type Lattice = NormedLattice<f64>;
pub type RationalLattice = NormedLattice<Rational>;
pub type Certificate = bpb::BpbCertificate<f64>;
pub type RationalCertificate = bpb::BpbCertificate<Rational>;
