//! Domain types for the campus parking allocation problem.
//!
//! Indices are 0-based internally; ids are 1-based and dense, matching the
//! row ids used in instance files and reports.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermitType {
    pub id: usize,
    pub label: String,
    /// Holders of a reserved permit never share a space.
    pub reserved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Building {
    pub id: usize,
    pub label: String,
    /// Users demanding parking, one entry per permit type.
    pub demand: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParkingLot {
    pub id: usize,
    pub label: String,
    /// Spaces available, one entry per permit type. Handicapped spaces are
    /// never part of this count.
    pub capacity: Vec<i64>,
}

impl ParkingLot {
    /// Total spaces over all permit types.
    pub fn total_capacity(&self) -> i64 {
        self.capacity.iter().sum()
    }
}

/// Walking cost from each building (row) to each lot (column).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DistanceMatrix {
    rows: Vec<Vec<i64>>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Panics if `(building, lot)` is outside the matrix.
    #[inline]
    pub fn get(&self, building: usize, lot: usize) -> i64 {
        self.rows[building][lot]
    }
}

/// Shape of an assignment tensor: permit types × buildings × lots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dimensions {
    pub permit_types: usize,
    pub buildings: usize,
    pub lots: usize,
}

impl Dimensions {
    pub fn new(permit_types: usize, buildings: usize, lots: usize) -> Self {
        Self {
            permit_types,
            buildings,
            lots,
        }
    }

    /// Number of cells in the tensor.
    pub fn len(&self) -> usize {
        self.permit_types * self.buildings * self.lots
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index, permit type outermost.
    #[inline]
    pub fn index(&self, permit_type: usize, building: usize, lot: usize) -> usize {
        debug_assert!(
            permit_type < self.permit_types && building < self.buildings && lot < self.lots
        );
        (permit_type * self.buildings + building) * self.lots + lot
    }
}

impl fmt::Display for Dimensions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.permit_types, self.buildings, self.lots)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub permit_types: Vec<PermitType>,
    pub buildings: Vec<Building>,
    pub lots: Vec<ParkingLot>,
    pub distances: DistanceMatrix,
    /// Probability that a permit holder brings a car on a given day.
    pub arrival_probability: f64,
}

impl ProblemInstance {
    pub fn dims(&self) -> Dimensions {
        Dimensions::new(
            self.permit_types.len(),
            self.buildings.len(),
            self.lots.len(),
        )
    }

    #[inline]
    pub fn demand(&self, permit_type: usize, building: usize) -> i64 {
        self.buildings[building].demand[permit_type]
    }

    #[inline]
    pub fn capacity(&self, permit_type: usize, lot: usize) -> i64 {
        self.lots[lot].capacity[permit_type]
    }

    #[inline]
    pub fn distance(&self, building: usize, lot: usize) -> i64 {
        self.distances.get(building, lot)
    }

    /// Indices of permit types flagged reserved.
    pub fn reserved_types(&self) -> impl Iterator<Item = usize> + '_ {
        self.permit_types
            .iter()
            .enumerate()
            .filter(|(_, t)| t.reserved)
            .map(|(i, _)| i)
    }

    /// Spaces of lot `lot` open to non-reserved permit types.
    pub fn unreserved_capacity(&self, lot: usize) -> i64 {
        self.permit_types
            .iter()
            .zip(&self.lots[lot].capacity)
            .filter(|(t, _)| !t.reserved)
            .map(|(_, &c)| c)
            .sum()
    }

    /// A lot is fully reserved when none of its capacity is unreserved.
    pub fn is_fully_reserved(&self, lot: usize) -> bool {
        self.unreserved_capacity(lot) == 0
    }
}

/// Aggregate counts derived from an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    /// Users demanding parking, T_U.
    pub total_users: i64,
    /// Spaces available, T_S.
    pub total_spaces: i64,
    /// Users per permit type, B_i.
    pub users_per_type: Vec<i64>,
    /// Spaces per permit type over all lots.
    pub spaces_per_type: Vec<i64>,
    /// Spaces per lot, N_k.
    pub spaces_per_lot: Vec<i64>,
}

impl Totals {
    pub fn reserved_users(&self, instance: &ProblemInstance) -> i64 {
        instance
            .reserved_types()
            .map(|i| self.users_per_type[i])
            .sum()
    }

    pub fn reserved_spaces(&self, instance: &ProblemInstance) -> i64 {
        instance
            .reserved_types()
            .map(|i| self.spaces_per_type[i])
            .sum()
    }
}

/// Totals of a dimensionally valid instance.
pub fn derived_totals(instance: &ProblemInstance) -> Totals {
    let l = instance.permit_types.len();
    let mut users_per_type = vec![0; l];
    for b in &instance.buildings {
        for (acc, &d) in users_per_type.iter_mut().zip(&b.demand) {
            *acc += d;
        }
    }
    let mut spaces_per_type = vec![0; l];
    for lot in &instance.lots {
        for (acc, &c) in spaces_per_type.iter_mut().zip(&lot.capacity) {
            *acc += c;
        }
    }
    let spaces_per_lot: Vec<i64> = instance
        .lots
        .iter()
        .map(ParkingLot::total_capacity)
        .collect();
    Totals {
        total_users: users_per_type.iter().sum(),
        total_spaces: spaces_per_lot.iter().sum(),
        users_per_type,
        spaces_per_type,
        spaces_per_lot,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    /// Where the finding applies, e.g. `distance (building 2, lot 4)`.
    pub context: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag} [{}]: {}", self.context, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    fn error(&mut self, context: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Error,
            context: context.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, context: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            severity: Severity::Warning,
            context: context.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "ok: no errors, no warnings");
        }
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Labels end up in comma-separated rows, so they must survive a split/trim.
pub(crate) fn label_problem(label: &str) -> Option<&'static str> {
    if label.is_empty() {
        Some("label is empty")
    } else if label.trim() != label {
        Some("label has leading or trailing whitespace")
    } else if label.contains([',', '\n', '\r']) {
        Some("label contains a comma or line break")
    } else {
        None
    }
}

/// Checks structure and ranges. Never fails; every finding lands in the report.
pub fn validate_instance(instance: &ProblemInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    let l = instance.permit_types.len();
    let m = instance.buildings.len();
    let n = instance.lots.len();

    let p = instance.arrival_probability;
    if !(p.is_finite() && p > 0.0 && p <= 1.0) {
        report.error("params", format!("arrival probability outside (0,1]: {p}"));
    }
    if l == 0 {
        report.error("params", "no permit types declared");
    }

    for (i, t) in instance.permit_types.iter().enumerate() {
        let ctx = format!("permit type {}", i + 1);
        if t.id != i + 1 {
            report.error(
                &ctx,
                format!("id {} is not dense (expected {})", t.id, i + 1),
            );
        }
        if let Some(problem) = label_problem(&t.label) {
            report.error(&ctx, problem);
        }
        if instance.permit_types[..i]
            .iter()
            .any(|o| o.label == t.label)
        {
            report.error(&ctx, format!("duplicate permit type label `{}`", t.label));
        }
    }

    let mut dims_ok = l > 0;
    for (k, lot) in instance.lots.iter().enumerate() {
        let ctx = format!("lot {}", k + 1);
        if lot.id != k + 1 {
            report.error(
                &ctx,
                format!("id {} is not dense (expected {})", lot.id, k + 1),
            );
        }
        if let Some(problem) = label_problem(&lot.label) {
            report.error(&ctx, problem);
        }
        if lot.capacity.len() != l {
            dims_ok = false;
            report.error(
                &ctx,
                format!(
                    "dimension mismatch: {} capacities for {l} permit types",
                    lot.capacity.len()
                ),
            );
        }
        for (i, &c) in lot.capacity.iter().enumerate() {
            if c < 0 {
                report.error(
                    &ctx,
                    format!("negative capacity {c} for permit type {}", i + 1),
                );
            }
        }
    }

    for (j, b) in instance.buildings.iter().enumerate() {
        let ctx = format!("building {}", j + 1);
        if b.id != j + 1 {
            report.error(
                &ctx,
                format!("id {} is not dense (expected {})", b.id, j + 1),
            );
        }
        if let Some(problem) = label_problem(&b.label) {
            report.error(&ctx, problem);
        }
        if b.demand.len() != l {
            dims_ok = false;
            report.error(
                &ctx,
                format!(
                    "dimension mismatch: {} demands for {l} permit types",
                    b.demand.len()
                ),
            );
        }
        for (i, &d) in b.demand.iter().enumerate() {
            if d < 0 {
                report.error(
                    &ctx,
                    format!("negative demand {d} for permit type {}", i + 1),
                );
            }
        }
    }

    let rows = instance.distances.rows();
    if rows.len() != m {
        dims_ok = false;
        report.error(
            "distance",
            format!("dimension mismatch: {} rows for {m} buildings", rows.len()),
        );
    }
    for (j, row) in rows.iter().enumerate() {
        if row.len() != n {
            dims_ok = false;
            report.error(
                format!("distance (building {})", j + 1),
                format!("dimension mismatch: {} entries for {n} lots", row.len()),
            );
        }
        for (k, &d) in row.iter().enumerate() {
            if d < 0 {
                report.error(
                    format!("distance (building {}, lot {})", j + 1, k + 1),
                    format!("negative distance {d}"),
                );
            }
        }
    }

    if dims_ok {
        let totals = derived_totals(instance);
        let rv_users = totals.reserved_users(instance);
        let rv_spaces = totals.reserved_spaces(instance);
        if rv_users != rv_spaces {
            report.warning(
                "totals",
                format!("reserved totals differ ({rv_users} vs {rv_spaces})"),
            );
        }
        if totals.total_users <= totals.total_spaces {
            report.warning(
                "totals",
                format!(
                    "total users {} do not exceed total spaces {}; over-issuance does not apply",
                    totals.total_users, totals.total_spaces
                ),
            );
        }
    }

    report
}

/// An integral assignment X_ijk with its objective Z.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationPlan {
    dims: Dimensions,
    assignments: Vec<i64>,
    objective: i64,
    reserved_mode: bool,
}

impl AllocationPlan {
    /// Panics if `assignments` does not have `dims.len()` entries.
    pub fn new(
        dims: Dimensions,
        assignments: Vec<i64>,
        objective: i64,
        reserved_mode: bool,
    ) -> Self {
        assert_eq!(
            assignments.len(),
            dims.len(),
            "assignment tensor does not match {dims}"
        );
        Self {
            dims,
            assignments,
            objective,
            reserved_mode,
        }
    }

    /// Builds the plan and computes Z from the instance distances.
    pub fn with_objective(
        instance: &ProblemInstance,
        assignments: Vec<i64>,
        reserved_mode: bool,
    ) -> Self {
        let mut plan = Self::new(instance.dims(), assignments, 0, reserved_mode);
        plan.objective = plan.recompute_objective(instance);
        plan
    }

    pub fn zeros(dims: Dimensions, reserved_mode: bool) -> Self {
        Self::new(dims, vec![0; dims.len()], 0, reserved_mode)
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn assignments(&self) -> &[i64] {
        &self.assignments
    }

    pub fn objective(&self) -> i64 {
        self.objective
    }

    pub fn reserved_mode(&self) -> bool {
        self.reserved_mode
    }

    pub fn set_reserved_mode(&mut self, reserved_mode: bool) {
        self.reserved_mode = reserved_mode;
    }

    #[inline]
    pub fn get(&self, permit_type: usize, building: usize, lot: usize) -> i64 {
        self.assignments[self.dims.index(permit_type, building, lot)]
    }

    /// Σ_i Σ_j X_ijk.
    pub fn lot_total(&self, lot: usize) -> i64 {
        (0..self.dims.permit_types)
            .flat_map(|i| (0..self.dims.buildings).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j, lot))
            .sum()
    }

    /// Σ_j X_ijk.
    pub fn lot_type_total(&self, permit_type: usize, lot: usize) -> i64 {
        (0..self.dims.buildings)
            .map(|j| self.get(permit_type, j, lot))
            .sum()
    }

    /// Σ_ijk D_jk X_ijk.
    pub fn recompute_objective(&self, instance: &ProblemInstance) -> i64 {
        self.cells()
            .map(|(_, j, k, x)| instance.distance(j, k) * x)
            .sum()
    }

    /// Every cell as `(permit_type, building, lot, count)` in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, usize, i64)> + '_ {
        let d = self.dims;
        self.assignments.iter().enumerate().map(move |(idx, &x)| {
            let k = idx % d.lots;
            let j = (idx / d.lots) % d.buildings;
            let i = idx / (d.lots * d.buildings);
            (i, j, k, x)
        })
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, i64)> + '_ {
        self.cells().filter(|c| c.3 != 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::fixtures;

    fn tiny() -> ProblemInstance {
        ProblemInstance {
            permit_types: vec![PermitType {
                id: 1,
                label: "Unreserved".into(),
                reserved: false,
            }],
            buildings: vec![Building {
                id: 1,
                label: "B".into(),
                demand: vec![12],
            }],
            lots: vec![ParkingLot {
                id: 1,
                label: "L".into(),
                capacity: vec![10],
            }],
            distances: DistanceMatrix::from_rows(vec![vec![3]]),
            arrival_probability: 0.7,
        }
    }

    #[test]
    fn ukzn_validates_clean() {
        let report = validate_instance(&fixtures::ukzn_westville());
        assert!(report.issues.is_empty(), "{report}");
    }

    #[test]
    fn ukzn_totals() {
        let inst = fixtures::ukzn_westville();
        let t = derived_totals(&inst);
        assert_eq!(t.total_users, 1290);
        assert_eq!(t.total_spaces, 1047);
        assert_eq!(t.users_per_type, vec![377, 913]);
        assert_eq!(t.spaces_per_type, vec![377, 670]);
        assert_eq!(t.spaces_per_lot, vec![201, 138, 126, 142, 68, 372]);
        assert_eq!(t.users_per_type.iter().sum::<i64>(), t.total_users);
    }

    #[test]
    fn ukzn_fully_reserved_lots() {
        let inst = fixtures::ukzn_westville();
        let full: Vec<usize> = (0..6).filter(|&k| inst.is_fully_reserved(k)).collect();
        assert_eq!(full, vec![1, 4]);
    }

    #[test]
    fn empty_instance_totals() {
        let inst = ProblemInstance {
            permit_types: vec![],
            buildings: vec![],
            lots: vec![],
            distances: DistanceMatrix::default(),
            arrival_probability: 0.7,
        };
        let t = derived_totals(&inst);
        assert_eq!((t.total_users, t.total_spaces), (0, 0));
    }

    #[test]
    fn wrong_demand_length_is_dimension_mismatch() {
        let mut inst = fixtures::ukzn_westville();
        inst.buildings[3].demand.push(7);
        let report = validate_instance(&inst);
        let err = report.errors().next().expect("error");
        assert!(err.message.contains("dimension mismatch"), "{err}");
        assert_eq!(err.context, "building 4");
    }

    #[test]
    fn reserved_total_mismatch_warns() {
        let mut inst = fixtures::ukzn_westville();
        inst.buildings[0].demand[0] = 42;
        let report = validate_instance(&inst);
        assert!(!report.has_errors());
        let w: Vec<_> = report.warnings().collect();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].message, "reserved totals differ (378 vs 377)");
    }

    #[test]
    fn undersubscribed_warns() {
        let mut inst = tiny();
        inst.buildings[0].demand[0] = 10;
        let report = validate_instance(&inst);
        assert!(!report.has_errors());
        assert!(report
            .warnings()
            .any(|w| w.message.contains("do not exceed")));
    }

    #[test]
    fn negative_values_and_bad_probability() {
        let mut inst = tiny();
        inst.distances = DistanceMatrix::from_rows(vec![vec![-4]]);
        inst.lots[0].capacity[0] = -1;
        inst.arrival_probability = 1.5;
        let report = validate_instance(&inst);
        let msgs: Vec<String> = report.errors().map(|e| e.to_string()).collect();
        assert_eq!(msgs.len(), 3, "{msgs:?}");
        assert!(msgs
            .iter()
            .any(|m| m.contains("distance (building 1, lot 1)")));
        assert!(msgs.iter().any(|m| m.contains("outside (0,1]")));
    }

    #[test]
    fn validation_is_pure() {
        let mut inst = fixtures::ukzn_westville();
        inst.buildings[2].demand[1] = -3;
        assert_eq!(validate_instance(&inst), validate_instance(&inst));
    }

    #[test]
    fn plan_cells_follow_index_order() {
        let dims = Dimensions::new(2, 3, 4);
        let plan = AllocationPlan::new(dims, (0..24).collect(), 0, true);
        for (i, j, k, x) in plan.cells() {
            assert_eq!(x as usize, dims.index(i, j, k));
        }
        assert_eq!(plan.lot_type_total(1, 2), 14 + 18 + 22);
    }
}
