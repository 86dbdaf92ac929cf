//! Seeded random inputs: nearly attaining operator/point pairs, splitter
//! pairs and converse instances.
//!
//! Every draw uses a ChaCha8 stream keyed by `(seed, index)`, so instance `i`
//! is the same whether it is produced alone, in a batch, or on another thread.
//! Values are multiples of `1/1000` (scaled down on retries), which keeps
//! rational instances small and exact.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bpb::{near_attainment, EtaBudget};
use crate::converse::{ConverseInstance, InftySumDomain};
use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, NormedLattice};
use crate::operator::{Matrix, PositiveOperator};
use crate::scalar::Scalar;

const GRAIN: usize = 1000;

/// Number of shrinking attempts before the exact planted structure is used.
const RETRIES: u32 = 6;

/// The random stream for instance `index` under `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `k / (GRAIN·10^shrink)` in `S`.
fn grain<S: Scalar>(k: i64, shrink: u32) -> S {
    let denom = S::of_usize(GRAIN * 10usize.pow(shrink));
    let mag = S::of_usize(k.unsigned_abs() as usize) / denom;
    if k < 0 {
        -mag
    } else {
        mag
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleInstance<S> {
    /// Norm one.
    pub s: PositiveOperator<S>,
    /// Sup norm one and near-attaining for the budget it was drawn for.
    pub x0: LatticeVector<S>,
    /// Retry at which the precondition first held; `RETRIES` means the
    /// exact planted structure (no leakage, zero middle columns).
    pub attempt: u32,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Neg,
    Pos,
    Mid,
}

/// A norm-one positive `S : (ℝⁿ, sup) → codomain` with a point `x₀` meeting
/// the near-attainment precondition of `budget`.
///
/// Columns are labelled negative, positive or middle. Negative and positive
/// columns live on disjoint row blocks with uniform entries, plus a small
/// leakage into the other block; middle columns are faint. `x₀` is `∓1` on
/// the labelled columns up to a small perturbation (one coordinate exactly
/// `±1`) and moderate on middle columns. Leakage and perturbation shrink
/// tenfold per retry until the precondition holds; the last retry uses the
/// exact structure, which attains the norm.
pub fn feasible_instance<S: Scalar>(
    rng: &mut ChaCha8Rng,
    n: usize,
    codomain: &NormedLattice<S>,
    budget: &EtaBudget,
    n_max: usize,
) -> Result<FeasibleInstance<S>> {
    if n == 0 {
        return Err(Error::EmptyDimension);
    }
    if n > n_max {
        return Err(Error::DimensionTooLarge { n, max: n_max });
    }
    let m = codomain.dim();

    let mut roles: Vec<Role> = (0..n)
        .map(|_| match rng.gen_range(0..10) {
            0..=3 => Role::Neg,
            4..=7 => Role::Pos,
            _ => Role::Mid,
        })
        .collect();
    if m == 1 {
        for r in roles.iter_mut().filter(|r| **r == Role::Neg) {
            *r = Role::Pos;
        }
    }
    if roles.iter().all(|r| *r == Role::Mid) {
        let k = rng.gen_range(0..n);
        roles[k] = if m == 1 || rng.gen_bool(0.5) {
            Role::Pos
        } else {
            Role::Neg
        };
    }
    let has_neg = roles.contains(&Role::Neg);
    let has_pos = roles.contains(&Role::Pos);

    let mut rows: Vec<usize> = (0..m).collect();
    rows.shuffle(rng);
    let cut = if has_neg && has_pos {
        rng.gen_range(1..m)
    } else if has_neg {
        m
    } else {
        0
    };
    let mut neg_rows = vec![false; m];
    for &i in &rows[..cut] {
        neg_rows[i] = true;
    }

    let block: Vec<i64> = (0..m * n)
        .map(|_| rng.gen_range(1..=GRAIN as i64))
        .collect();
    let leak: Vec<i64> = (0..m * n)
        .map(|_| {
            if rng.gen_bool(0.3) {
                rng.gen_range(1..=10)
            } else {
                0
            }
        })
        .collect();
    let mid_vals: Vec<i64> = (0..n).map(|_| rng.gen_range(-900..=900)).collect();
    let pert: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=10)).collect();
    let exact_at = *roles
        .iter()
        .enumerate()
        .filter(|(_, r)| **r != Role::Mid)
        .map(|(k, _)| k)
        .collect::<Vec<_>>()
        .choose(rng)
        .expect("a labelled column exists");

    for attempt in 0..=RETRIES {
        let exact = attempt == RETRIES;
        let mut matrix = Matrix::<S>::zeros(m, n);
        for (i, &neg) in neg_rows.iter().enumerate() {
            for (j, role) in roles.iter().enumerate() {
                let k = i * n + j;
                let own = match role {
                    Role::Neg => neg,
                    Role::Pos => !neg,
                    Role::Mid => false,
                };
                let v = if own {
                    grain(block[k], 0)
                } else if exact {
                    S::zero()
                } else {
                    grain(leak[k], attempt + 1)
                };
                matrix.set(i, j, v);
            }
        }
        let op = PositiveOperator::new(matrix, codomain.clone())?;
        let norm = op.norm();
        if norm.is_zero() {
            return Err(Error::Degenerate("generated operator vanishes"));
        }
        let s = if norm == S::one() {
            op
        } else {
            op.scaled(&(S::one() / norm))?
        };

        let x: Vec<S> = (0..n)
            .map(|j| {
                let p = if exact || j == exact_at {
                    S::zero()
                } else {
                    grain(pert[j], attempt + 1)
                };
                match roles[j] {
                    Role::Neg => p - S::one(),
                    Role::Pos => S::one() - p,
                    Role::Mid => grain(mid_vals[j], 0),
                }
            })
            .collect();
        let x0 = LatticeVector::new(x)?;
        if near_attainment(&s, &x0, budget)? {
            return Ok(FeasibleInstance { s, x0, attempt });
        }
    }
    Err(Error::Degenerate(
        "planted structure failed the precondition",
    ))
}

/// A pair `f₁, f₂ ≥ 0` with `‖f₁ + f₂‖ = 1` and
/// `‖f₁ − f₂‖ ≥ 1/(1 + δ(ε/3))`, for the splitter. Each row is dominated by
/// one of the two vectors; the other gets a small overlap that shrinks on
/// retries and vanishes on the last.
pub fn splitter_pair<S: Scalar>(
    rng: &mut ChaCha8Rng,
    lattice: &NormedLattice<S>,
    epsilon: f64,
    delta: &crate::monotonicity::Modulus,
) -> Result<(LatticeVector<S>, LatticeVector<S>)> {
    let m = lattice.dim();
    let first: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
    let major: Vec<i64> = (0..m)
        .map(|_| {
            if rng.gen_bool(0.85) {
                rng.gen_range(1..=GRAIN as i64)
            } else {
                0
            }
        })
        .collect();
    let minor: Vec<i64> = (0..m)
        .map(|_| {
            if rng.gen_bool(0.5) {
                rng.gen_range(0..=10)
            } else {
                0
            }
        })
        .collect();
    let mut major = major;
    if major.iter().all(|&v| v == 0) {
        major[rng.gen_range(0..m)] = rng.gen_range(1..=GRAIN as i64);
    }
    let separation = S::one() / (S::one() + S::lift(delta.eval(epsilon / 3.0)));
    for attempt in 0..=RETRIES {
        let exact = attempt == RETRIES;
        let mut f1 = Vec::with_capacity(m);
        let mut f2 = Vec::with_capacity(m);
        for i in 0..m {
            let big = grain::<S>(major[i], 0);
            let small = if exact {
                S::zero()
            } else {
                grain::<S>(minor[i], attempt + 1)
            };
            if first[i] {
                f1.push(big);
                f2.push(small);
            } else {
                f1.push(small);
                f2.push(big);
            }
        }
        let f1 = LatticeVector::new(f1)?;
        let f2 = LatticeVector::new(f2)?;
        let norm = lattice.norm_of(&f1.add(&f2)?);
        let inv = S::one() / norm;
        let (f1, f2) = (f1.scale(&inv), f2.scale(&inv));
        let sum = lattice.norm_of(&f1.add(&f2)?);
        if sum <= S::one() + S::default_tol() && lattice.norm_of(&f1.sub(&f2)?) >= separation {
            return Ok((f1, f2));
        }
    }
    Err(Error::Degenerate("splitter pair failed the hypotheses"))
}

/// A converse instance on `ℝ^{dim_m} ⊕_∞ ℝ^{dim_n}` with codomain `lattice`:
/// `v > 0` with `‖v‖ = 1` and `0 ≤ u ≤ v` with `‖u‖ ≈ u_norm`, obtained by
/// bisecting a cap `λ` in `uᵢ = min(1, λwᵢ)·vᵢ` for random weights `w`.
pub fn converse_instance(
    rng: &mut ChaCha8Rng,
    dim_m: usize,
    dim_n: usize,
    lattice: &NormedLattice<f64>,
    u_norm: f64,
) -> Result<ConverseInstance<f64>> {
    if !(0.0..=1.0).contains(&u_norm) {
        return Err(Error::Precondition(format!(
            "‖u‖ = {u_norm} outside [0, 1]"
        )));
    }
    let m = lattice.dim();
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..1.0)).collect();
    let raw = LatticeVector::new(raw)?;
    let v = raw.scale(&(1.0 / lattice.norm_of(&raw)));
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..1.0)).collect();
    let shaped = |lambda: f64| -> LatticeVector<f64> {
        let e = v
            .entries()
            .iter()
            .zip(&w)
            .map(|(vi, wi)| (lambda * wi).min(1.0) * vi)
            .collect();
        LatticeVector::new(e).expect("nonempty")
    };
    let (mut lo, mut hi) = (0.0, 5.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lattice.norm_of(&shaped(mid)) < u_norm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = shaped(if u_norm >= 1.0 { hi } else { lo });

    let unit_block = |rng: &mut ChaCha8Rng, d: usize| -> LatticeVector<f64> {
        let mut e: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
        e[rng.gen_range(0..d)] = 1.0;
        LatticeVector::new(e).expect("nonempty")
    };
    let m0 = unit_block(rng, dim_m);
    let n0 = unit_block(rng, dim_n);
    ConverseInstance::new(
        InftySumDomain::new(dim_m, dim_n)?,
        lattice.clone(),
        u,
        v,
        m0,
        n0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpb::compute_eta;
    use crate::monotonicity::Modulus;
    use crate::Rational;

    #[test]
    fn same_seed_same_instances() {
        let lat = NormedLattice::l1(4);
        let budget = compute_eta(0.6, &Modulus::l1()).unwrap();
        let draw =
            |i| feasible_instance::<f64>(&mut instance_rng(42, i), 5, &lat, &budget, 22).unwrap();
        for i in 0..10 {
            assert_eq!(draw(i), draw(i));
        }
        assert_ne!(draw(0), draw(1));
    }

    #[test]
    fn feasible_instances_meet_the_precondition() {
        for (lat, modulus) in [
            (NormedLattice::l1(3), Modulus::l1()),
            (NormedLattice::lp(5, 2.0).unwrap(), Modulus::lp(2.0)),
            (NormedLattice::lp(1, 4.0).unwrap(), Modulus::lp(4.0)),
        ] {
            for eps in [0.3, 0.9] {
                let budget = compute_eta(eps, &modulus).unwrap();
                for i in 0..20 {
                    let inst =
                        feasible_instance::<f64>(&mut instance_rng(7, i), 6, &lat, &budget, 22)
                            .unwrap();
                    assert!((inst.s.norm() - 1.0).abs() < 1e-12);
                    assert_eq!(inst.x0.sup_norm(), 1.0);
                    assert!(near_attainment(&inst.s, &inst.x0, &budget).unwrap());
                }
            }
        }
    }

    #[test]
    fn rational_instances_are_exactly_normalized() {
        let lat = NormedLattice::<Rational>::l1(3);
        let budget = compute_eta(0.3, &Modulus::l1()).unwrap();
        let inst = feasible_instance(&mut instance_rng(1, 0), 4, &lat, &budget, 22).unwrap();
        assert_eq!(inst.s.norm(), Rational::from_integer(1.into()));
    }

    #[test]
    fn oversized_domains_are_refused() {
        let lat = NormedLattice::l1(2);
        let budget = compute_eta(0.5, &Modulus::l1()).unwrap();
        assert_eq!(
            feasible_instance::<f64>(&mut instance_rng(0, 0), 30, &lat, &budget, 22).unwrap_err(),
            Error::DimensionTooLarge { n: 30, max: 22 }
        );
    }

    #[test]
    fn splitter_pairs_meet_the_hypotheses() {
        let lat = NormedLattice::<f64>::lp(6, 2.0).unwrap();
        let delta = Modulus::lp(2.0);
        for i in 0..50 {
            let (f1, f2) = splitter_pair(&mut instance_rng(3, i), &lat, 0.5, &delta).unwrap();
            assert!(lat.norm_of(&f1.add(&f2).unwrap()) <= 1.0 + 1e-12);
            assert!(f1.is_nonnegative() && f2.is_nonnegative());
        }
    }

    #[test]
    fn converse_instances_hit_the_target_norm() {
        let lat = NormedLattice::lp(2, 2.0).unwrap();
        let inst = converse_instance(&mut instance_rng(5, 0), 2, 3, &lat, 0.3).unwrap();
        assert!((lat.norm_of(&inst.u) - 0.3).abs() < 1e-9);
        assert!((lat.norm_of(&inst.v) - 1.0).abs() < 1e-12);
        assert!(inst.u.le(&inst.v));
    }
}
