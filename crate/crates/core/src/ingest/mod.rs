//! Reading and writing instances and results.

mod instance;
mod plan;

pub use instance::{parse_instance, read_instance, write_instance, DEFAULT_ARRIVAL_PROBABILITY};
pub use plan::{
    parse_plan_json, write_plan, write_plan_csv, write_plan_json, AssignmentRecord, PlanFormat,
};

use thiserror::Error;

use crate::model::ValidationReport;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid instance:\n{0}")]
    Invalid(ValidationReport),
    #[error("invalid plan document: {0}")]
    Plan(String),
}

/// Bundled reference data.
pub mod fixtures {
    use crate::model::ProblemInstance;

    /// Westville campus data: 2 permit types, 12 buildings, 6 lots, p = 0.7.
    pub const UKZN_WESTVILLE: &str = include_str!("../../fixtures/ukzn_westville.instance");

    /// The same data with the building 1 / lot 1 distance read as 225.
    pub const UKZN_WESTVILLE_RECONCILED: &str =
        include_str!("../../fixtures/ukzn_westville_reconciled.instance");

    pub fn ukzn_westville() -> ProblemInstance {
        super::parse_instance(UKZN_WESTVILLE).expect("bundled fixture parses")
    }

    pub fn ukzn_westville_reconciled() -> ProblemInstance {
        super::parse_instance(UKZN_WESTVILLE_RECONCILED).expect("bundled fixture parses")
    }
}
