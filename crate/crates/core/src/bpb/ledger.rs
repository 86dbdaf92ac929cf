use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    /// `|lhs − rhs| ≤ tol`.
    Eq,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "==",
        }
    }
}

/// One inequality evaluated during a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub holds: bool,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {:e} {} {:e} [{}]",
            self.name,
            self.lhs,
            self.relation.symbol(),
            self.rhs,
            if self.holds { "ok" } else { "FAIL" }
        )
    }
}

/// Every inequality a run evaluated, in evaluation order.
///
/// Comparisons are made in the run's scalar type; `tol` widens them in the
/// lenient direction (zero for exact scalars).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub checks: Vec<Check>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record<S: Scalar>(
        &mut self,
        name: &str,
        lhs: &S,
        relation: Relation,
        rhs: &S,
        tol: &S,
    ) -> bool {
        let holds = match relation {
            Relation::Le => *lhs <= rhs.clone() + tol.clone(),
            Relation::Lt => *lhs < rhs.clone() + tol.clone(),
            Relation::Ge => *lhs >= rhs.clone() - tol.clone(),
            Relation::Gt => *lhs > rhs.clone() - tol.clone(),
            Relation::Eq => (lhs.clone() - rhs.clone()).abs() <= *tol,
        };
        self.checks.push(Check {
            name: name.to_string(),
            lhs: lhs.approx(),
            relation,
            rhs: rhs.approx(),
            holds,
        });
        holds
    }

    pub fn record_bool(&mut self, name: &str, holds: bool) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            lhs: if holds { 1.0 } else { 0.0 },
            relation: Relation::Eq,
            rhs: 1.0,
            holds,
        });
        holds
    }

    pub fn extend_prefixed(&mut self, prefix: &str, other: Ledger) {
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub(crate) fn first_violation(&self) -> Option<Error> {
        self.failures().next().map(|c| Error::LedgerViolation {
            check: c.name.clone(),
            lhs: c.lhs,
            rhs: c.rhs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn tolerance_widens_in_lenient_direction() {
        let mut l = Ledger::new();
        assert!(l.record("a", &1.0, Relation::Le, &0.999_999_999_5, &1e-9));
        assert!(!l.record("b", &1.0, Relation::Lt, &1.0, &0.0));
        assert!(l.record("c", &0.5, Relation::Gt, &0.5, &1e-12));
        assert!(l.record("d", &1.0, Relation::Eq, &(1.0 + 1e-10), &1e-9));
        assert!(!l.all_hold());
        assert_eq!(l.failures().count(), 1);
        assert!(
            matches!(l.first_violation(), Some(Error::LedgerViolation { ref check, .. }) if check == "b")
        );
    }

    #[test]
    fn exact_comparisons() {
        let mut l = Ledger::new();
        let zero = ratio(0, 1);
        assert!(l.record("eq", &ratio(2, 4), Relation::Eq, &ratio(1, 2), &zero));
        assert!(!l.record("lt", &ratio(1, 3), Relation::Lt, &ratio(1, 3), &zero));
    }
}
