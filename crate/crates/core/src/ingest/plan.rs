//! Rendering and reading of allocation plans.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::model::{AllocationPlan, Dimensions, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlanFormat {
    #[default]
    Table,
    Json,
    Csv,
}

/// One nonzero cell, with 1-based ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AssignmentRecord {
    pub permit_type: usize,
    pub building: usize,
    pub lot: usize,
    pub count: i64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDocument {
    objective: i64,
    reserved_mode: bool,
    assignments: Vec<AssignmentRecord>,
}

fn records(plan: &AllocationPlan) -> Vec<AssignmentRecord> {
    plan.nonzero()
        .map(|(i, j, k, count)| AssignmentRecord {
            permit_type: i + 1,
            building: j + 1,
            lot: k + 1,
            count,
        })
        .collect()
}

/// Deterministic rendering. The table format uses `instance` for labels and
/// reserved flags; JSON and CSV depend only on the plan.
pub fn write_plan(instance: &ProblemInstance, plan: &AllocationPlan, format: PlanFormat) -> String {
    match format {
        PlanFormat::Json => write_plan_json(plan),
        PlanFormat::Csv => write_plan_csv(plan),
        PlanFormat::Table => write_plan_table(instance, plan),
    }
}

pub fn write_plan_json(plan: &AllocationPlan) -> String {
    let doc = PlanDocument {
        objective: plan.objective(),
        reserved_mode: plan.reserved_mode(),
        assignments: records(plan),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plan serializes");
    s.push('\n');
    s
}

pub fn write_plan_csv(plan: &AllocationPlan) -> String {
    let mut out = String::from("permit_type,building,lot,count\n");
    for r in records(plan) {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.permit_type, r.building, r.lot, r.count
        );
    }
    out
}

fn write_plan_table(instance: &ProblemInstance, plan: &AllocationPlan) -> String {
    let dims = plan.dims();
    let mut out = String::new();
    let mode = if plan.reserved_mode() {
        "reserved policy enforced"
    } else {
        "reserved policy not enforced"
    };
    let _ = writeln!(out, "allocation ({mode})");

    let type_label = |i: usize| {
        instance
            .permit_types
            .get(i)
            .map_or_else(|| format!("type {}", i + 1), |t| t.label.clone())
    };
    let width = (0..dims.permit_types)
        .map(|i| type_label(i).len())
        .max()
        .unwrap_or(0)
        .max(6);

    let header = |out: &mut String, first: &str| {
        let _ = write!(out, "  {first:<20}");
        for i in 0..dims.permit_types {
            let _ = write!(out, " {:>width$}", type_label(i));
        }
        let _ = writeln!(out, " {:>width$}", "total");
    };

    for k in 0..dims.lots {
        let lot_label = instance.lots.get(k).map_or("", |l| l.label.as_str());
        let _ = writeln!(out, "\nlot {} ({lot_label})", k + 1);
        header(&mut out, "building");
        for j in 0..dims.buildings {
            let row: Vec<i64> = (0..dims.permit_types).map(|i| plan.get(i, j, k)).collect();
            if row.iter().all(|&x| x == 0) {
                continue;
            }
            let name = format!(
                "{} {}",
                j + 1,
                instance.buildings.get(j).map_or("", |b| b.label.as_str())
            );
            let _ = write!(out, "  {:<20}", name.trim_end());
            for x in &row {
                let _ = write!(out, " {x:>width$}");
            }
            let _ = writeln!(out, " {:>width$}", row.iter().sum::<i64>());
        }
        let _ = write!(out, "  {:<20}", "subtotal");
        for i in 0..dims.permit_types {
            let _ = write!(out, " {:>width$}", plan.lot_type_total(i, k));
        }
        let _ = writeln!(out, " {:>width$}", plan.lot_total(k));
    }

    out.push_str("\nsummary\n");
    header(&mut out, "lot");
    for k in 0..dims.lots {
        let _ = write!(out, "  {:<20}", k + 1);
        for i in 0..dims.permit_types {
            let _ = write!(out, " {:>width$}", plan.lot_type_total(i, k));
        }
        let _ = writeln!(out, " {:>width$}", plan.lot_total(k));
    }
    let _ = writeln!(out, "\nZ = {}", plan.objective());
    out
}

/// Reads a JSON plan. The document does not carry the tensor shape, so the
/// caller supplies it (normally `instance.dims()`).
pub fn parse_plan_json(text: &str, dims: Dimensions) -> Result<AllocationPlan, IngestError> {
    let doc: PlanDocument =
        serde_json::from_str(text).map_err(|e| IngestError::Plan(e.to_string()))?;
    let mut cells = vec![0i64; dims.len()];
    let mut seen = vec![false; dims.len()];
    for r in &doc.assignments {
        let in_range = (1..=dims.permit_types).contains(&r.permit_type)
            && (1..=dims.buildings).contains(&r.building)
            && (1..=dims.lots).contains(&r.lot);
        if !in_range {
            return Err(IngestError::Plan(format!(
                "assignment ({}, {}, {}) outside {dims}",
                r.permit_type, r.building, r.lot
            )));
        }
        let idx = dims.index(r.permit_type - 1, r.building - 1, r.lot - 1);
        if std::mem::replace(&mut seen[idx], true) {
            return Err(IngestError::Plan(format!(
                "assignment ({}, {}, {}) listed twice",
                r.permit_type, r.building, r.lot
            )));
        }
        cells[idx] = r.count;
    }
    Ok(AllocationPlan::new(
        dims,
        cells,
        doc.objective,
        doc.reserved_mode,
    ))
}
