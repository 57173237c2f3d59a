//! Exact allocation of permit holders to lots.
//!
//! The allocation LP has a network constraint matrix, so it is solved as a
//! minimum-cost flow and the optimum is integral without any rounding.

mod check;
pub mod mcf;
mod network;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use check::{check_plan, check_plan_as, ConstraintReport, Violation};
pub use network::{build_network, ArcKind, FlowNetwork, NetworkArc, NodeKind};

use crate::model::{AllocationPlan, ProblemInstance};
use crate::permits::PermitIssuance;
use mcf::{certify, min_cost_flow, verify_certificate, FlowError};

/// A lower bound M_ik that takes part in an infeasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundRef {
    pub permit_type: usize,
    pub lot: usize,
    pub lower: i64,
}

impl fmt::Display for BoundRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(type {}, lot {}) >= {}",
            self.permit_type + 1,
            self.lot + 1,
            self.lower
        )
    }
}

fn join_bounds(bounds: &[BoundRef]) -> String {
    bounds
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllocateError {
    #[error("permits issued ({permits}) differ from users ({users})")]
    PermitMismatch { permits: i64, users: i64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("allocation infeasible: {shortfall} units short; lower bounds that cannot all hold: {}", join_bounds(.violated))]
    Infeasible {
        shortfall: i64,
        violated: Vec<BoundRef>,
    },
    #[error("flow solver rejected the network: {0}")]
    Solver(FlowError),
    #[error("optimality certificate rejected: {0}")]
    Certificate(String),
}

/// Node potentials proving optimality by complementary slackness: every arc
/// with flow below capacity has reduced cost ≥ 0 and every arc with flow
/// above its lower bound has reduced cost ≤ 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalityCertificate {
    pub potentials: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub plan: AllocationPlan,
    pub certificate: OptimalityCertificate,
    /// Flow on every network arc, in network order.
    pub flow: Vec<i64>,
    /// Shortest-path augmentations.
    pub iterations: usize,
    pub wall_time: Duration,
}

impl SolveOutcome {
    /// Re-verifies the certificate against `network`; empty means optimal.
    pub fn certificate_violations(&self, network: &FlowNetwork) -> Vec<mcf::CertificateViolation> {
        verify_certificate(
            &network.supply,
            &network.arc_specs(),
            &self.flow,
            &self.certificate.potentials,
        )
    }
}

pub fn solve_min_cost_flow(network: &FlowNetwork) -> Result<SolveOutcome, AllocateError> {
    let start = Instant::now();
    let specs = network.arc_specs();
    let solution = match min_cost_flow(&network.supply, &specs) {
        Ok(s) => s,
        Err(FlowError::Infeasible {
            shortfall,
            blocking,
        }) => {
            let violated = blocking
                .iter()
                .filter_map(|&a| match network.arcs[a].kind {
                    ArcKind::Reserve { permit_type, lot } => Some(BoundRef {
                        permit_type,
                        lot,
                        lower: network.arcs[a].lower,
                    }),
                    _ => None,
                })
                .collect();
            return Err(AllocateError::Infeasible {
                shortfall,
                violated,
            });
        }
        Err(e) => return Err(AllocateError::Solver(e)),
    };

    let potentials = certify(network.nodes.len(), &specs, &solution.flow)
        .ok_or_else(|| AllocateError::Certificate("residual graph has a negative cycle".into()))?;
    let violations = verify_certificate(&network.supply, &specs, &solution.flow, &potentials);
    if let Some(v) = violations.first() {
        return Err(AllocateError::Certificate(format!("{v:?}")));
    }

    let dims = network.dims;
    let mut cells = vec![0i64; dims.len()];
    for (arc, &f) in network.arcs.iter().zip(&solution.flow) {
        if let ArcKind::Walk {
            permit_type,
            building,
            lot,
        } = arc.kind
        {
            cells[dims.index(permit_type, building, lot)] = f;
        }
    }
    let plan = AllocationPlan::new(dims, cells, solution.cost, network.reserved_mode);

    Ok(SolveOutcome {
        plan,
        certificate: OptimalityCertificate { potentials },
        flow: solution.flow,
        iterations: solution.augmentations,
        wall_time: start.elapsed(),
    })
}

/// Builds the network for `instance` and solves it.
pub fn solve(
    instance: &ProblemInstance,
    permits: &PermitIssuance,
    reserved_mode: bool,
) -> Result<SolveOutcome, AllocateError> {
    let network = build_network(instance, permits, reserved_mode)?;
    solve_min_cost_flow(&network)
}
