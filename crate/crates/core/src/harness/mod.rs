//! Command line, run reports, parameter overrides and validation suites.

pub mod cli;
pub mod config;
pub mod report;
pub mod validate;

pub use config::ParamOverrides;
pub use report::{CandidateEntry, RunReport, REPORT_SCHEMA};
pub use validate::{run_suite, Check, Suite, SuiteResult};
