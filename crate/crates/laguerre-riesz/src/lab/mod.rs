//! Desk-scale experiments measuring the exponent laws obeyed by the
//! spectral projections, Riesz means, and square function, plus the
//! slope-fitting, reporting, and run-directory machinery behind the CLI.

pub mod experiments;
pub mod fit;
pub mod oscillatory;
pub mod profiles;
pub mod report;
pub mod runner;

pub use fit::{fit_loglog, SlopeFit};
pub use report::{ExperimentReport, Verdict};
pub use runner::{run_experiment, verify, CriterionOutcome, RunConfig};
