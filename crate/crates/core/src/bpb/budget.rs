use serde::Serialize;

use crate::error::{Error, Result};
use crate::monotonicity::{Form, Modulus};

/// Smallest `η` the search will return.
const ETA_FLOOR: f64 = 1e-12;

/// Relative width at which the bisection for `η` stops.
const ETA_REL_TOL: f64 = 1e-10;

/// Tolerances derived from `ε` and a modulus `δ`.
///
/// `eta_internal` is the `η` the construction partitions with; the caller's
/// point must satisfy `‖S x₀‖ > 1/(1 + δ(η²)) = 1 − eta_definition`.
#[derive(Debug, Clone, Serialize)]
pub struct EtaBudget {
    pub epsilon: f64,
    pub eta_internal: f64,
    pub eta_definition: f64,
    /// `δ(η²)`.
    pub delta_eta_sq: f64,
    /// `δ(ε/18)`, which fixes the separation the two blocks must reach.
    pub delta_split: f64,
    #[serde(skip)]
    pub modulus: Modulus,
}

impl PartialEq for EtaBudget {
    fn eq(&self, other: &Self) -> bool {
        self.epsilon == other.epsilon
            && self.eta_internal == other.eta_internal
            && self.eta_definition == other.eta_definition
            && self.delta_eta_sq == other.delta_eta_sq
            && self.delta_split == other.delta_split
            && self.modulus.label() == other.modulus.label()
    }
}

impl EtaBudget {
    /// `1/(1 + δ(ε/18))`.
    pub fn split_threshold(&self) -> f64 {
        1.0 / (1.0 + self.delta_split)
    }

    /// `1/(1 + δ(η²))`, the near-attainment threshold.
    pub fn attainment_threshold(&self) -> f64 {
        1.0 / (1.0 + self.delta_eta_sq)
    }
}

fn admissible(epsilon: f64, delta: &Modulus, eta: f64) -> bool {
    let lhs = 1.0 / (1.0 + delta.eval(epsilon / 18.0));
    let rhs = 1.0 / (1.0 + delta.eval(eta * eta)) - 3.0 * eta;
    eta > 0.0 && eta < epsilon / 18.0 && lhs < rhs
}

/// Largest `η < ε/18` (up to a relative bisection width of `1e-10`) with
/// `1/(1 + δ(ε/18)) < 1/(1 + δ(η²)) − 3η`, plus the derived tolerances.
pub fn compute_eta(epsilon: f64, delta: &Modulus) -> Result<EtaBudget> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if delta.form() != Form::Delta {
        return Err(Error::WrongForm {
            expected: "delta",
            found: delta.form().name(),
        });
    }
    let too_weak = Error::ModulusTooWeak { epsilon };
    let mut lo = ETA_FLOOR;
    let mut hi = epsilon / 18.0;
    if !admissible(epsilon, delta, lo) {
        return Err(too_weak);
    }
    if admissible(epsilon, delta, hi * (1.0 - f64::EPSILON)) {
        lo = hi * (1.0 - f64::EPSILON);
    } else {
        for _ in 0..256 {
            if hi - lo <= ETA_REL_TOL * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if admissible(epsilon, delta, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let eta = lo;
    let delta_eta_sq = delta.eval(eta * eta);
    if !(admissible(epsilon, delta, eta) && delta_eta_sq > 0.0) {
        return Err(too_weak);
    }
    Ok(EtaBudget {
        epsilon,
        eta_internal: eta,
        eta_definition: delta_eta_sq / (1.0 + delta_eta_sq),
        delta_eta_sq,
        delta_split: delta.eval(epsilon / 18.0),
        modulus: delta.clone(),
    })
}
