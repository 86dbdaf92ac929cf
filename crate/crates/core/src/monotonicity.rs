//! Moduli of uniform monotonicity.
//!
//! A lattice `Y` is uniformly monotone with modulus `δ` when, for
//! `x, y ≥ 0` with `‖x‖ = 1`, `‖x + y‖ ≤ 1 + δ(ε)` forces `‖y‖ ≤ ε`.
//! Two equivalent reformulations use a function `η` on pairs `0 ≤ u ≤ v`:
//!
//! * [`Form::Eta2`]: `‖v‖ = 1` and `‖v − u‖ > 1 − η(ε)` force `‖u‖ ≤ ε`;
//! * [`Form::Eta3`]: `‖v − u‖ > (1 − η(ε))‖v‖` forces `‖u‖ ≤ ε‖v‖`.
//!
//! `δ ↦ δ/(1+δ)` turns a `δ` into an `η` valid for both, and
//! `η ↦ (ε ↦ η(ε/2))` goes back. Moduli here are real functions, so this
//! module works in `f64` throughout.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::NormedLattice;

/// Safety factor applied to numerically estimated moduli.
pub const SAFETY_FACTOR: f64 = 0.99;

/// Estimates below this are reported as "not uniformly monotone".
pub const NOT_UM_THRESHOLD: f64 = 1e-6;

/// Slack on the conclusion of a sampled implication, absorbing rounding in
/// the bisection that places samples on the boundary of the premise.
pub const VALIDATION_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    Delta,
    Eta2,
    Eta3,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Delta => "delta",
            Form::Eta2 => "eta2",
            Form::Eta3 => "eta3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Source {
    Analytic,
    /// Step function built from grid estimates.
    NumericUnderApprox {
        points: usize,
        safety: f64,
    },
    Converted {
        from: Form,
    },
}

/// A real function `(0, 1) → [0, ∞)` together with the implication it witnesses.
#[derive(Clone)]
pub struct Modulus {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    form: Form,
    source: Source,
    label: String,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modulus")
            .field("label", &self.label)
            .field("form", &self.form)
            .field("source", &self.source)
            .finish()
    }
}

impl Modulus {
    pub fn from_fn(
        label: impl Into<String>,
        form: Form,
        source: Source,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            form,
            source,
            label: label.into(),
        }
    }

    /// `δ(ε) = ε`, exact for `ℓ₁` and weighted `ℓ₁` (additive on positive vectors).
    pub fn l1() -> Self {
        Self::from_fn("identity", Form::Delta, Source::Analytic, |t| t)
    }

    /// `δ(ε) = (1 + εᵖ)^{1/p} − 1`, the optimal modulus of `ℓ_p`.
    ///
    /// For `x, y ≥ 0`, `(a + b)ᵖ ≥ aᵖ + bᵖ` coordinatewise gives
    /// `‖x + y‖ᵖ ≥ ‖x‖ᵖ + ‖y‖ᵖ`, with equality on disjoint supports.
    /// Evaluated through `ln_1p`/`exp_m1` so tiny arguments keep their value.
    pub fn lp(p: f64) -> Self {
        Self::from_fn(
            format!("lp({p})"),
            Form::Delta,
            Source::Analytic,
            move |t| (t.powf(p).ln_1p() / p).exp_m1(),
        )
    }

    /// `δ(ε) = c·ε`.
    pub fn linear(c: f64) -> Self {
        Self::from_fn(
            format!("linear({c})"),
            Form::Delta,
            Source::Analytic,
            move |t| c * t,
        )
    }

    pub fn constant(c: f64, form: Form) -> Self {
        Self::from_fn(format!("constant({c})"), form, Source::Analytic, move |_| c)
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    fn require(&self, expected: Form) -> Result<()> {
        if self.form != expected {
            return Err(Error::WrongForm {
                expected: expected.name(),
                found: self.form.name(),
            });
        }
        Ok(())
    }
}

/// `η(ε) = δ(ε) / (1 + δ(ε))`, valid for both eta formulations.
pub fn delta_to_eta(delta: &Modulus, target: Form) -> Result<Modulus> {
    delta.require(Form::Delta)?;
    if target == Form::Delta {
        return Err(Error::WrongForm {
            expected: "eta2 or eta3",
            found: target.name(),
        });
    }
    let inner = delta.f.clone();
    Ok(Modulus::from_fn(
        format!("eta[{}]", delta.label),
        target,
        Source::Converted { from: Form::Delta },
        move |t| {
            let d = inner(t);
            d / (1.0 + d)
        },
    ))
}

/// `δ(ε) = η(ε/2)`.
pub fn eta_to_delta(eta: &Modulus) -> Result<Modulus> {
    if eta.form == Form::Delta {
        return Err(Error::WrongForm {
            expected: "eta2 or eta3",
            found: eta.form.name(),
        });
    }
    let inner = eta.f.clone();
    Ok(Modulus::from_fn(
        format!("delta[{}]", eta.label),
        Form::Delta,
        Source::Converted { from: eta.form },
        move |t| inner(t / 2.0),
    ))
}

/// Knobs for [`modulus_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    /// Coordinate levels `{0, 1/k, …, 1}` of the exhaustive grid.
    pub grid_levels: usize,
    /// The exhaustive grid is skipped when it would exceed this many pairs.
    pub grid_cap: usize,
    pub random_starts: usize,
    /// How many of the best starting pairs get refined.
    pub refine_starts: usize,
    pub min_step: f64,
    pub safety: f64,
    pub seed: u64,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            grid_levels: 4,
            grid_cap: 20_000,
            random_starts: 64,
            refine_starts: 6,
            min_step: 1e-7,
            safety: SAFETY_FACTOR,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub epsilon: f64,
    /// Smallest `‖x + y‖` found with `‖x‖ = 1`, `‖y‖ = ε`, `x, y ≥ 0`.
    pub min_sum_norm: f64,
    /// `safety · (min_sum_norm − 1)`, or 0 when flagged.
    pub delta_hat: f64,
    pub uniformly_monotone: bool,
}

struct Objective<'a> {
    lattice: &'a NormedLattice<f64>,
    epsilon: f64,
}

impl Objective<'_> {
    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let norm = self.lattice.norm();
        let na = norm.eval(a);
        let nb = norm.eval(b);
        if na <= 0.0 || nb <= 0.0 {
            return f64::INFINITY;
        }
        let s: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x / na + self.epsilon * y / nb)
            .collect();
        norm.eval(&s)
    }
}

/// Under-approximates the optimal modulus of `lattice` at `epsilon`.
///
/// Minimises `‖x + y‖` over a family of normalised positive pairs (basis
/// pairs, an exhaustive coarse grid in low dimension, seeded random starts),
/// refines the best with projected coordinate descent and shrinks the
/// result by `params.safety`.
pub fn modulus_estimate(
    lattice: &NormedLattice<f64>,
    epsilon: f64,
    params: &SearchParams,
) -> Result<ModulusEstimate> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let n = lattice.dim();
    let obj = Objective { lattice, epsilon };
    let mut starts: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();

    let basis = |k: usize| {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        e
    };
    for i in 0..n {
        for j in 0..n {
            starts.push((basis(i), basis(j)));
        }
        starts.push((vec![1.0; n], basis(i)));
        starts.push((basis(i), vec![1.0; n]));
    }
    starts.push((vec![1.0; n], vec![1.0; n]));

    let levels = params.grid_levels.max(1);
    let per_vector = (levels + 1).checked_pow(n as u32);
    if let Some(pairs) = per_vector.and_then(|p| p.checked_mul(p)) {
        if pairs <= params.grid_cap {
            let grid: Vec<Vec<f64>> = grid_points(n, levels);
            for a in &grid {
                for b in &grid {
                    starts.push((a.clone(), b.clone()));
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..params.random_starts {
        starts.push((random_positive(&mut rng, n), random_positive(&mut rng, n)));
    }

    let mut scored: Vec<(f64, usize)> = starts
        .iter()
        .enumerate()
        .map(|(k, (a, b))| (obj.eval(a, b), k))
        .filter(|(v, _)| v.is_finite())
        .collect();
    scored.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut best = scored.first().map_or(f64::INFINITY, |s| s.0);
    for &(_, k) in scored.iter().take(params.refine_starts) {
        let (a, b) = starts[k].clone();
        best = best.min(refine(&obj, a, b, params.min_step));
    }

    let raw = (best - 1.0).max(0.0);
    let delta_hat = params.safety * raw;
    let uniformly_monotone = delta_hat >= NOT_UM_THRESHOLD;
    Ok(ModulusEstimate {
        epsilon,
        min_sum_norm: best,
        delta_hat: if uniformly_monotone { delta_hat } else { 0.0 },
        uniformly_monotone,
    })
}

fn grid_points(n: usize, levels: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<f64>| {
                (0..=levels).map(move |l| {
                    let mut p = prefix.clone();
                    p.push(l as f64 / levels as f64);
                    p
                })
            })
            .collect();
    }
    out.retain(|p| p.iter().any(|&v| v > 0.0));
    out
}

fn random_positive(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.35) {
                    0.0
                } else {
                    rng.gen_range(0.0..1.0)
                }
            })
            .collect();
        if v.iter().any(|&x| x > 0.0) {
            return v;
        }
    }
}

/// Projected coordinate descent on `(a, b) ∈ ℝⁿ₊ × ℝⁿ₊`.
fn refine(obj: &Objective<'_>, mut a: Vec<f64>, mut b: Vec<f64>, min_step: f64) -> f64 {
    let n = a.len();
    let mut value = obj.eval(&a, &b);
    let mut step = 0.25;
    while step >= min_step {
        let mut improved = false;
        for which in 0..2 {
            for k in 0..n {
                for dir in [-1.0, 1.0] {
                    let v = if which == 0 { &mut a } else { &mut b };
                    let old = v[k];
                    v[k] = (old + dir * step).max(0.0);
                    let trial = obj.eval(&a, &b);
                    if trial < value {
                        value = trial;
                        improved = true;
                    } else {
                        let v = if which == 0 { &mut a } else { &mut b };
                        v[k] = old;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        } else {
            // keep the parametrisation well scaled
            for v in [&mut a, &mut b] {
                let m = v.iter().cloned().fold(0.0, f64::max);
                if m > 0.0 {
                    v.iter_mut().for_each(|x| *x /= m);
                }
            }
        }
    }
    value
}

/// Builds a numeric Delta-form modulus from estimates on `grid`.
///
/// Raw estimates are made nondecreasing by a running minimum taken from the
/// right; between grid points the value of the nearest grid point below is
/// used, and below the first grid point the modulus is 0. Both choices only
/// lower the function, so a valid witness stays valid.
pub fn estimate_modulus(
    lattice: &NormedLattice<f64>,
    grid: &[f64],
    params: &SearchParams,
) -> Result<Modulus> {
    let mut eps: Vec<f64> = grid.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut values = eps
        .iter()
        .map(|&e| modulus_estimate(lattice, e, params).map(|r| r.delta_hat))
        .collect::<Result<Vec<_>>>()?;
    for k in (0..values.len().saturating_sub(1)).rev() {
        values[k] = values[k].min(values[k + 1]);
    }
    let points = eps.len();
    Ok(Modulus::from_fn(
        format!("numeric[{}]", lattice.norm().name()),
        Form::Delta,
        Source::NumericUnderApprox {
            points,
            safety: params.safety,
        },
        move |t| match eps.partition_point(|&e| e <= t) {
            0 => 0.0,
            k => values[k - 1],
        },
    ))
}

/// Evenly spaced interior grid `{k/(points+1)}`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    (1..=points)
        .map(|k| k as f64 / (points + 1) as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// A Delta-form modulus exceeded the identity: `δ(t) > t`.
    ExceedsIdentity { t: f64, value: f64 },
    /// `t₁ < t₂` but `m(t₁) > m(t₂)`.
    Decreasing { t1: f64, t2: f64 },
    /// The premise held but `conclusion > bound`.
    Implication {
        epsilon: f64,
        conclusion: f64,
        bound: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub form: Form,
    pub samples: usize,
    pub violation_count: usize,
    /// The first few violations, for diagnostics.
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    fn push(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < 16 {
            self.violations.push(v);
        }
    }
}

/// Randomised search for counterexamples to the implication `m` claims.
///
/// Each sample fixes `ε`, a positive normalised base point and a positive
/// direction, then moves along the direction as far as the premise allows
/// (bisection), which is where a counterexample would be.
pub fn validate_modulus(
    lattice: &NormedLattice<f64>,
    m: &Modulus,
    samples: usize,
    seed: u64,
) -> ValidationReport {
    let mut report = ValidationReport {
        form: m.form(),
        samples,
        violation_count: 0,
        violations: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lattice.dim();
    let norm = lattice.norm();
    let normalize = |v: Vec<f64>| {
        let s = norm.eval(&v);
        v.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };

    // shape checks on a fixed grid
    let ts = uniform_grid(99);
    for w in ts.windows(2) {
        if m.eval(w[0]) > m.eval(w[1]) {
            report.push(Violation::Decreasing { t1: w[0], t2: w[1] });
        }
    }

    for _ in 0..samples {
        let epsilon = rng.gen_range(0.001..0.999);
        let level = m.eval(epsilon);
        if m.form() == Form::Delta && level > epsilon {
            report.push(Violation::ExceedsIdentity {
                t: epsilon,
                value: level,
            });
        }
        match m.form() {
            Form::Delta => {
                let x = normalize(random_positive(&mut rng, n));
                let d = random_positive(&mut rng, n);
                let sum_norm = |s: f64| {
                    let v: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + s * b).collect();
                    norm.eval(&v)
                };
                let limit = 1.0 + level;
                let s = largest_admissible(|s| sum_norm(s) <= limit, 0.0);
                let y_norm = s * norm.eval(&d);
                let bound = widened_epsilon(m, epsilon, level + rounding(n) * limit);
                if y_norm > bound + VALIDATION_SLACK {
                    report.push(Violation::Implication {
                        epsilon,
                        conclusion: y_norm,
                        bound,
                    });
                }
            }
            Form::Eta2 | Form::Eta3 => {
                let scale = if m.form() == Form::Eta3 {
                    rng.gen_range(0.1..10.0)
                } else {
                    1.0
                };
                let v: Vec<f64> = normalize(random_positive(&mut rng, n))
                    .into_iter()
                    .map(|x| x * scale)
                    .collect();
                let w: Vec<f64> = (0..n)
                    .map(|_| {
                        if rng.gen_bool(0.3) {
                            0.0
                        } else {
                            rng.gen_range(0.0..=1.0)
                        }
                    })
                    .collect();
                let v_norm = norm.eval(&v);
                let u_at =
                    |s: f64| -> Vec<f64> { v.iter().zip(&w).map(|(a, b)| s * b * a).collect() };
                let gap = |s: f64| {
                    let u = u_at(s);
                    let diff: Vec<f64> = v.iter().zip(&u).map(|(a, b)| a - b).collect();
                    norm.eval(&diff) > (1.0 - level) * v_norm
                };
                // ‖v − s·(w∘v)‖ is nonincreasing in s ∈ [0, 1]
                let s = if gap(1.0) {
                    1.0
                } else if gap(0.0) {
                    bisect_last_true(gap, 0.0, 1.0)
                } else {
                    continue;
                };
                let u_norm = norm.eval(&u_at(s));
                let bound = widened_epsilon(m, epsilon, level + rounding(n)) * v_norm;
                if u_norm > bound + VALIDATION_SLACK * v_norm.max(1.0) {
                    report.push(Violation::Implication {
                        epsilon,
                        conclusion: u_norm,
                        bound,
                    });
                }
            }
        }
    }
    report
}

/// Relative error bound for one norm evaluation in `ℝⁿ`.
fn rounding(n: usize) -> f64 {
    8.0 * (n as f64 + 2.0) * f64::EPSILON
}

/// Smallest `t ≥ epsilon` with `m(t) ≥ level`, i.e. the conclusion the
/// modulus still guarantees when the premise is only known up to rounding.
/// Equals `epsilon` whenever the rounding is negligible against `m`.
fn widened_epsilon(m: &Modulus, epsilon: f64, level: f64) -> f64 {
    if m.eval(epsilon) >= level {
        return epsilon;
    }
    if m.eval(1.0) < level {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (epsilon, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if m.eval(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest `s ≥ start` with `ok(s)` for a predicate that is true up to some
/// threshold and false after it; capped at `1e6`.
fn largest_admissible(ok: impl Fn(f64) -> bool, start: f64) -> f64 {
    let mut hi = 1e-3_f64.max(start);
    while ok(hi) {
        if hi > 1e6 {
            return hi;
        }
        hi *= 2.0;
    }
    bisect_last_true(ok, start, hi)
}

fn bisect_last_true(ok: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MonotoneNorm;

    fn weighted(n: usize) -> NormedLattice<f64> {
        let w = (0..n).map(|k| 0.5 + k as f64).collect();
        NormedLattice::new(n, MonotoneNorm::weighted_l1(w).unwrap()).unwrap()
    }

    #[test]
    fn conversion_spot_values() {
        let eta = delta_to_eta(&Modulus::l1(), Form::Eta2).unwrap();
        assert!((eta.eval(0.5) - 1.0 / 3.0).abs() <= 1e-12);
        assert!((eta.eval(0.9) - 0.9 / 1.9).abs() <= 1e-12);
        assert!(eta.eval(1e-14) < 2e-14);
        assert_eq!(eta.source(), &Source::Converted { from: Form::Delta });

        let eta = Modulus::from_fn("e", Form::Eta2, Source::Analytic, |t| t / (1.0 + t));
        let delta = eta_to_delta(&eta).unwrap();
        assert!((delta.eval(0.5) - 0.2).abs() <= 1e-12);
        assert_eq!(delta.form(), Form::Delta);

        let c = eta_to_delta(&Modulus::constant(0.3, Form::Eta3)).unwrap();
        assert_eq!(c.eval(0.1), 0.3);
        assert_eq!(c.eval(0.8), 0.3);
    }

    #[test]
    fn conversions_check_forms() {
        assert!(delta_to_eta(&Modulus::constant(0.1, Form::Eta2), Form::Eta2).is_err());
        assert!(delta_to_eta(&Modulus::l1(), Form::Delta).is_err());
        assert!(eta_to_delta(&Modulus::l1()).is_err());
    }

    #[test]
    fn round_trip_on_l1_matches_closed_form() {
        let back = eta_to_delta(&delta_to_eta(&Modulus::l1(), Form::Eta2).unwrap()).unwrap();
        for e in [0.1, 0.4, 0.9] {
            let expected = (e / 2.0) / (1.0 + e / 2.0);
            assert!((back.eval(e) - expected).abs() <= 1e-15);
        }
        assert!(validate_modulus(&NormedLattice::l1(2), &back, 10_000, 7).passed());
    }

    #[test]
    fn lp_modulus_keeps_tiny_values() {
        let d = Modulus::lp(4.0);
        let t: f64 = 4e-17;
        let expected = t.powi(4) / 4.0;
        assert!((d.eval(t) / expected - 1.0).abs() < 1e-12);
        assert!((Modulus::lp(2.0).eval(0.5) - (1.25f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn estimate_l1_is_safety_scaled_identity() {
        let params = SearchParams::default();
        for n in 1..=6 {
            let l = NormedLattice::l1(n);
            for e in [0.1, 0.5, 0.9] {
                let r = modulus_estimate(&l, e, &params).unwrap();
                assert!(r.uniformly_monotone);
                assert!(
                    r.delta_hat <= e && r.delta_hat >= 0.99 * e - 1e-9,
                    "{n} {e} {r:?}"
                );
            }
        }
    }

    #[test]
    fn estimate_l2_finds_disjoint_minimum() {
        let l = NormedLattice::lp(3, 2.0).unwrap();
        let r = modulus_estimate(&l, 0.5, &SearchParams::default()).unwrap();
        let exact = 1.25f64.sqrt() - 1.0;
        assert!((r.min_sum_norm - 1.25f64.sqrt()).abs() < 1e-9);
        assert!((r.delta_hat - 0.99 * exact).abs() < 1e-9);
    }

    #[test]
    fn estimate_flags_sup_norm() {
        let r = modulus_estimate(&NormedLattice::sup(2), 0.3, &SearchParams::default()).unwrap();
        assert!(!r.uniformly_monotone);
        assert_eq!(r.delta_hat, 0.0);
    }

    #[test]
    fn estimate_rejects_bad_epsilon() {
        for e in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(modulus_estimate(&NormedLattice::l1(2), e, &SearchParams::default()).is_err());
        }
    }

    #[test]
    fn numeric_modulus_is_monotone_and_valid() {
        let l = NormedLattice::lp(2, 2.0).unwrap();
        let m = estimate_modulus(&l, &uniform_grid(9), &SearchParams::default()).unwrap();
        assert_eq!(m.eval(0.05), 0.0);
        let report = validate_modulus(&l, &m, 10_000, 11);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn validation_examples() {
        let l1 = NormedLattice::l1(2);
        assert!(validate_modulus(&l1, &Modulus::l1(), 10_000, 1).passed());

        let too_big = validate_modulus(&l1, &Modulus::linear(2.0), 10_000, 1);
        assert!(!too_big.passed());
        assert!(too_big
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ExceedsIdentity { .. })));
        assert!(too_big
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Implication { .. })));

        let sup = NormedLattice::sup(2);
        assert!(!validate_modulus(&sup, &Modulus::linear(0.01), 10_000, 1).passed());
    }

    #[test]
    fn analytic_moduli_and_conversions_pass() {
        let cases = vec![
            (NormedLattice::l1(3), Modulus::l1()),
            (weighted(3), Modulus::l1()),
            (NormedLattice::lp(3, 2.0).unwrap(), Modulus::lp(2.0)),
            (NormedLattice::lp(2, 4.0).unwrap(), Modulus::lp(4.0)),
        ];
        for (l, d) in cases {
            let r = validate_modulus(&l, &d, 5_000, 3);
            assert!(r.passed(), "{} {:?}", l.norm(), r);
            for form in [Form::Eta2, Form::Eta3] {
                let eta = delta_to_eta(&d, form).unwrap();
                assert!(
                    validate_modulus(&l, &eta, 5_000, 4).passed(),
                    "{} {form:?}",
                    l.norm()
                );
            }
        }
    }
}
