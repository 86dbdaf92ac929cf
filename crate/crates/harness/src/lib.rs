//! Batch runner for the correction, converse and modulus experiments.
//!
//! Experiments are read from TOML or JSON files ([`config`]), executed in
//! parallel with order-stable output ([`suite`]) and written as a CSV plus a
//! full JSON report ([`report`]). Every certificate is checked again from its
//! serialized form by [`verify`] before it is written.

pub mod config;
pub mod report;
pub mod suite;
pub mod verify;
pub mod wire;

pub use config::{Command, Experiment, Mode};
pub use report::Report;
pub use suite::{run_experiment, run_suite, RunOptions, SuiteEntry};
