//! Experiment harness: configuration, parallel runs with deterministic
//! output, CSV and summary writers, SVG plots, the closed-form check suite
//! and concentrability audits.

pub mod audit;
pub mod config;
pub mod formulas;
pub mod plot;
pub mod records;
pub mod runner;

pub use config::{AlgorithmSpec, ExperimentConfig, ExperimentId};
pub use formulas::{formula_suite, formula_suite_with, FormulaReport, SuiteHooks};
pub use records::{ExperimentRecord, Summary};
pub use runner::{run_experiment, RunOutput};
