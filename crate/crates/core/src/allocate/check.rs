//! Direct-summation checks of an allocation against the model constraints.
//!
//! Nothing here touches the flow network; the checker recomputes every
//! constraint family from the plan tensor alone.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{AllocationPlan, ProblemInstance};
use crate::permits::PermitIssuance;

/// Indices are 0-based; `Display` prints 1-based ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// Plan, instance and permits disagree on shape.
    Shape(String),
    /// Σ_k X_ijk ≠ P_ij.
    Demand {
        permit_type: usize,
        building: usize,
        required: i64,
        allocated: i64,
    },
    /// Σ_ij X_ijk ≠ A_k.
    Permits {
        lot: usize,
        issued: i64,
        allocated: i64,
    },
    /// Σ_j X_ijk < M_ik while the reserved policy applies.
    Reserved {
        permit_type: usize,
        lot: usize,
        required: i64,
        allocated: i64,
    },
    /// X_ijk < 0.
    Negative {
        permit_type: usize,
        building: usize,
        lot: usize,
        value: i64,
    },
    /// Reported Z differs from Σ D_jk X_ijk.
    Objective { reported: i64, recomputed: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Shape(ref s) => write!(f, "shape: {s}"),
            Violation::Demand {
                permit_type,
                building,
                required,
                allocated,
            } => write!(
                f,
                "demand (type {}, building {}): {allocated} allocated, {required} required",
                permit_type + 1,
                building + 1
            ),
            Violation::Permits {
                lot,
                issued,
                allocated,
            } => write!(
                f,
                "permits (lot {}): {allocated} allocated, {issued} issued",
                lot + 1
            ),
            Violation::Reserved {
                permit_type,
                lot,
                required,
                allocated,
            } => write!(
                f,
                "reserved (type {}, lot {}): {allocated} allocated, at least {required} required",
                permit_type + 1,
                lot + 1
            ),
            Violation::Negative {
                permit_type,
                building,
                lot,
                value,
            } => write!(
                f,
                "negative (type {}, building {}, lot {}): {value}",
                permit_type + 1,
                building + 1,
                lot + 1
            ),
            Violation::Objective {
                reported,
                recomputed,
            } => {
                write!(f, "objective: reported {reported}, recomputed {recomputed}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub reserved_mode: bool,
    pub recomputed_objective: i64,
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn is_satisfied(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn reserved_violations(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::Reserved { .. }))
    }
}

/// Checks `plan` in the mode it was solved in.
pub fn check_plan(
    instance: &ProblemInstance,
    permits: &PermitIssuance,
    plan: &AllocationPlan,
) -> ConstraintReport {
    check_plan_as(instance, permits, plan, plan.reserved_mode())
}

/// Checks `plan` as if it had been produced with `reserved_mode`.
pub fn check_plan_as(
    instance: &ProblemInstance,
    permits: &PermitIssuance,
    plan: &AllocationPlan,
    reserved_mode: bool,
) -> ConstraintReport {
    let dims = instance.dims();
    let mut violations = Vec::new();
    if plan.dims() != dims {
        violations.push(Violation::Shape(format!(
            "plan is {}, instance is {dims}",
            plan.dims()
        )));
    }
    if permits.per_lot.len() != dims.lots {
        violations.push(Violation::Shape(format!(
            "{} permit counts for {} lots",
            permits.per_lot.len(),
            dims.lots
        )));
    }
    if !violations.is_empty() {
        return ConstraintReport {
            reserved_mode,
            recomputed_objective: 0,
            violations,
        };
    }

    let (l, m, n) = (dims.permit_types, dims.buildings, dims.lots);
    let mut lot_totals = vec![0i64; n];
    let mut type_lot_totals = vec![0i64; l * n];
    let mut objective = 0i64;

    for i in 0..l {
        for j in 0..m {
            let mut row = 0;
            for k in 0..n {
                let x = plan.get(i, j, k);
                if x < 0 {
                    violations.push(Violation::Negative {
                        permit_type: i,
                        building: j,
                        lot: k,
                        value: x,
                    });
                }
                row += x;
                lot_totals[k] += x;
                type_lot_totals[i * n + k] += x;
                objective += instance.distance(j, k) * x;
            }
            let required = instance.demand(i, j);
            if row != required {
                violations.push(Violation::Demand {
                    permit_type: i,
                    building: j,
                    required,
                    allocated: row,
                });
            }
        }
    }
    for (k, (&allocated, &issued)) in lot_totals.iter().zip(&permits.per_lot).enumerate() {
        if allocated != issued {
            violations.push(Violation::Permits {
                lot: k,
                issued,
                allocated,
            });
        }
    }
    if reserved_mode {
        for i in 0..l {
            for k in 0..n {
                let required = instance.capacity(i, k);
                let allocated = type_lot_totals[i * n + k];
                if allocated < required {
                    violations.push(Violation::Reserved {
                        permit_type: i,
                        lot: k,
                        required,
                        allocated,
                    });
                }
            }
        }
    }
    if objective != plan.objective() {
        violations.push(Violation::Objective {
            reported: plan.objective(),
            recomputed: objective,
        });
    }

    ConstraintReport {
        reserved_mode,
        recomputed_objective: objective,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::fixtures;
    use crate::permits::compute_permits;

    #[test]
    fn zero_plan_violates_every_positive_demand() {
        let inst = fixtures::ukzn_westville();
        let permits = compute_permits(&inst).unwrap();
        let plan = AllocationPlan::zeros(inst.dims(), true);
        let report = check_plan(&inst, &permits, &plan);
        let demand = report
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::Demand { .. }))
            .count();
        assert_eq!(demand, 24);
        assert_eq!(report.reserved_violations().count(), 10);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::Permits {
                lot: 0,
                issued: 258,
                allocated: 0
            }
        )));
    }

    #[test]
    fn objective_mismatch_and_negative_cells() {
        let inst = fixtures::ukzn_westville();
        let permits = compute_permits(&inst).unwrap();
        let mut cells = vec![0; inst.dims().len()];
        cells[0] = -1;
        let plan = AllocationPlan::new(inst.dims(), cells, 0, false);
        let report = check_plan(&inst, &permits, &plan);
        assert!(report.violations.contains(&Violation::Negative {
            permit_type: 0,
            building: 0,
            lot: 0,
            value: -1
        }));
        assert!(report.violations.contains(&Violation::Objective {
            reported: 0,
            recomputed: -255
        }));
    }

    #[test]
    fn shape_mismatch_reported() {
        let inst = fixtures::ukzn_westville();
        let permits = PermitIssuance::from_counts(vec![1, 2]);
        let plan = AllocationPlan::zeros(crate::model::Dimensions::new(1, 1, 1), true);
        let report = check_plan(&inst, &permits, &plan);
        assert_eq!(report.violations.len(), 2);
        assert!(report.violations[0].to_string().starts_with("shape"));
    }
}
