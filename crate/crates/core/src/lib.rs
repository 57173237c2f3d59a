//! Exact solver toolkit for campus parking allocation under a reserved-space
//! policy.
//!
//! The pipeline runs in two stages. [`permits`] decides how many permits each
//! lot may issue so every holder faces the same chance of finding a space;
//! [`allocate`] then assigns users to lots minimizing total walking distance,
//! solved as a minimum-cost flow so the optimum is integral and certified.
//! [`oracle`] and [`simulate`] are independent checks on both stages.

pub mod allocate;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod permits;
pub mod simulate;

pub use allocate::{
    build_network, check_plan, check_plan_as, solve, solve_min_cost_flow, AllocateError,
    ConstraintReport, FlowNetwork, OptimalityCertificate, SolveOutcome, Violation,
};
pub use ingest::{fixtures, parse_instance, write_instance, write_plan, IngestError, PlanFormat};
pub use model::{
    derived_totals, validate_instance, AllocationPlan, Building, Dimensions, DistanceMatrix,
    ParkingLot, PermitType, ProblemInstance, Totals, ValidationReport,
};
pub use oracle::{brute_force_optimum, EnumerationBudget, OracleError};
pub use permits::{
    build_quadratic, compute_permits, solve_quadratic, PermitError, PermitIssuance, ServiceLevel,
};
pub use simulate::{exact_binomial_tail, simulate_arrivals, OverflowReport};
