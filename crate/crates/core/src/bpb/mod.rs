//! The correction procedure and its building blocks.

mod budget;
mod ledger;
mod solver;
mod split;

pub use budget::{compute_eta, EtaBudget};
pub use ledger::{Check, Ledger, Relation};
pub use solver::{
    bpb_correct_c0, bpb_correct_linfty, near_attainment, partial_sum_norms, positivity_lift,
    truncation_sup, BpbCertificate, Measurements, Partition, Policy, SolveOptions, Solver,
};
pub use split::{disjoint_support_split, split_construction, SplitOutcome};
