//! Sectioned plain-text instance format.
//!
//! ```text
//! # comment lines start with '#'; blank lines are ignored
//! [params]
//! p = 0.7
//! types = Reserved, Unreserved
//! reserved = Reserved
//!
//! [lots]
//! 1, Lot 1, 40, 161          # id, label, one capacity per permit type
//!
//! [demand]
//! 1, Building 1, 41, 101     # id, label, one demand per permit type
//!
//! [distance]
//! 1, 255, 270                # building id, one cost per lot in lot order
//! ```
//!
//! Sections appear exactly once and in this order. `types` and `reserved`
//! are optional: when both are absent the instance has the two types
//! `Reserved` (reserved) and `Unreserved`; when only `types` is given no type
//! is reserved. `p` defaults to 0.7.

use std::fmt::Write as _;

use super::IngestError;
use crate::model::{
    validate_instance, Building, DistanceMatrix, ParkingLot, PermitType, ProblemInstance,
};

pub const DEFAULT_ARRIVAL_PROBABILITY: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Params,
    Lots,
    Demand,
    Distance,
}

impl Section {
    fn from_header(name: &str) -> Option<Self> {
        match name {
            "params" => Some(Self::Params),
            "lots" => Some(Self::Lots),
            "demand" => Some(Self::Demand),
            "distance" => Some(Self::Distance),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Params => "params",
            Self::Lots => "lots",
            Self::Demand => "demand",
            Self::Distance => "distance",
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_int(line: usize, field: &str, what: &str) -> Result<i64, IngestError> {
    field.parse::<i64>().map_err(|_| {
        syntax(
            line,
            format!("{what}: expected an integer, found `{field}`"),
        )
    })
}

fn parse_id(line: usize, field: &str, what: &str) -> Result<usize, IngestError> {
    field.parse::<usize>().map_err(|_| {
        syntax(
            line,
            format!("{what}: expected a positive integer id, found `{field}`"),
        )
    })
}

fn split_list(value: &str) -> Vec<String> {
    if value.trim().is_empty() {
        return Vec::new();
    }
    value.split(',').map(|s| s.trim().to_string()).collect()
}

#[derive(Default)]
struct Params {
    p: Option<f64>,
    types: Option<Vec<String>>,
    reserved: Option<Vec<String>>,
}

struct Row {
    line: usize,
    fields: Vec<String>,
}

/// Parses a document into an instance without semantic validation.
///
/// Only the grammar is checked here: section layout, column counts and
/// integer syntax. Range checks such as negative values are left to
/// [`validate_instance`].
pub fn read_instance(document: &str) -> Result<ProblemInstance, IngestError> {
    let mut current: Option<Section> = None;
    let mut seen: Vec<Section> = Vec::new();
    let mut params = Params::default();
    let mut rows: [Vec<Row>; 3] = [Vec::new(), Vec::new(), Vec::new()];

    for (idx, raw) in document.lines().enumerate() {
        let line = idx + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        if let Some(inner) = text.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| syntax(line, format!("malformed section header `{text}`")))?
                .trim();
            let section = Section::from_header(name)
                .ok_or_else(|| syntax(line, format!("unknown section `[{name}]`")))?;
            if seen.contains(&section) {
                return Err(syntax(line, format!("section `[{name}]` appears twice")));
            }
            if let Some(&last) = seen.last() {
                if section < last {
                    return Err(syntax(
                        line,
                        format!("section `[{name}]` must come before `[{}]`", last.name()),
                    ));
                }
            }
            seen.push(section);
            current = Some(section);
            continue;
        }

        match current {
            None => return Err(syntax(line, "content before the first section header")),
            Some(Section::Params) => {
                let (key, value) = text.split_once('=').ok_or_else(|| {
                    syntax(line, format!("expected `key = value`, found `{text}`"))
                })?;
                let key = key.trim();
                let value = value.trim();
                let duplicate = match key {
                    "p" => {
                        let p: f64 = value.parse().map_err(|_| {
                            syntax(line, format!("p: expected a number, found `{value}`"))
                        })?;
                        params.p.replace(p).is_some()
                    }
                    "types" => params.types.replace(split_list(value)).is_some(),
                    "reserved" => params.reserved.replace(split_list(value)).is_some(),
                    other => return Err(syntax(line, format!("unknown parameter `{other}`"))),
                };
                if duplicate {
                    return Err(syntax(line, format!("parameter `{key}` given twice")));
                }
            }
            Some(section) => {
                let fields = text.split(',').map(|s| s.trim().to_string()).collect();
                rows[section as usize - 1].push(Row { line, fields });
            }
        }
    }

    for required in [
        Section::Params,
        Section::Lots,
        Section::Demand,
        Section::Distance,
    ] {
        if !seen.contains(&required) {
            return Err(syntax(
                document.lines().count().max(1),
                format!("missing section `[{}]`", required.name()),
            ));
        }
    }

    let permit_types = build_permit_types(&params)?;
    let l = permit_types.len();
    let [lot_rows, demand_rows, distance_rows] = rows;

    let mut lots = Vec::with_capacity(lot_rows.len());
    for row in &lot_rows {
        if row.fields.len() != 2 + l {
            return Err(syntax(
                row.line,
                format!(
                    "lot row has {} columns, expected id, label and {l} capacities",
                    row.fields.len()
                ),
            ));
        }
        let id = parse_id(row.line, &row.fields[0], "lot id")?;
        let capacity = row.fields[2..]
            .iter()
            .map(|f| parse_int(row.line, f, &format!("lot {id} capacity")))
            .collect::<Result<_, _>>()?;
        lots.push(ParkingLot {
            id,
            label: row.fields[1].clone(),
            capacity,
        });
    }

    let mut buildings = Vec::with_capacity(demand_rows.len());
    for row in &demand_rows {
        if row.fields.len() != 2 + l {
            return Err(syntax(
                row.line,
                format!(
                    "demand row has {} columns, expected id, label and {l} demands",
                    row.fields.len()
                ),
            ));
        }
        let id = parse_id(row.line, &row.fields[0], "building id")?;
        let demand = row.fields[2..]
            .iter()
            .map(|f| parse_int(row.line, f, &format!("building {id} demand")))
            .collect::<Result<_, _>>()?;
        buildings.push(Building {
            id,
            label: row.fields[1].clone(),
            demand,
        });
    }

    let n = lots.len();
    let mut matrix = Vec::with_capacity(distance_rows.len());
    for (j, row) in distance_rows.iter().enumerate() {
        let id = parse_id(row.line, &row.fields[0], "distance row building id")?;
        if id != j + 1 {
            return Err(syntax(
                row.line,
                format!(
                    "distance row for building {id} out of order (expected building {})",
                    j + 1
                ),
            ));
        }
        let entries = &row.fields[1..];
        if entries.len() != n {
            return Err(syntax(
                row.line,
                format!(
                    "distance row for building {id} has {} entries for {n} lots",
                    entries.len()
                ),
            ));
        }
        let values = entries
            .iter()
            .map(|f| parse_int(row.line, f, &format!("distance for building {id}")))
            .collect::<Result<_, _>>()?;
        matrix.push(values);
    }

    Ok(ProblemInstance {
        permit_types,
        buildings,
        lots,
        distances: DistanceMatrix::from_rows(matrix),
        arrival_probability: params.p.unwrap_or(DEFAULT_ARRIVAL_PROBABILITY),
    })
}

fn build_permit_types(params: &Params) -> Result<Vec<PermitType>, IngestError> {
    let (labels, reserved) = match (&params.types, &params.reserved) {
        (None, None) => (
            vec!["Reserved".to_string(), "Unreserved".to_string()],
            vec!["Reserved".to_string()],
        ),
        (Some(t), r) => (t.clone(), r.clone().unwrap_or_default()),
        (None, Some(_)) => {
            return Err(syntax(1, "parameter `reserved` requires `types`"));
        }
    };
    for r in &reserved {
        if !labels.contains(r) {
            return Err(syntax(
                1,
                format!("reserved type `{r}` is not listed in `types`"),
            ));
        }
    }
    Ok(labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| PermitType {
            id: i + 1,
            reserved: reserved.contains(&label),
            label,
        })
        .collect())
}

/// Parses and validates. Validation errors come back as
/// [`IngestError::Invalid`] carrying the full report.
pub fn parse_instance(document: &str) -> Result<ProblemInstance, IngestError> {
    let instance = read_instance(document)?;
    let report = validate_instance(&instance);
    if report.has_errors() {
        return Err(IngestError::Invalid(report));
    }
    Ok(instance)
}

/// Serializes an instance; [`parse_instance`] reads it back unchanged.
pub fn write_instance(instance: &ProblemInstance) -> String {
    let mut out = String::new();
    let labels: Vec<&str> = instance
        .permit_types
        .iter()
        .map(|t| t.label.as_str())
        .collect();
    let reserved: Vec<&str> = instance
        .permit_types
        .iter()
        .filter(|t| t.reserved)
        .map(|t| t.label.as_str())
        .collect();

    out.push_str("[params]\n");
    let _ = writeln!(out, "p = {}", instance.arrival_probability);
    let _ = writeln!(out, "types = {}", labels.join(", "));
    let _ = writeln!(out, "reserved = {}", reserved.join(", "));

    out.push_str("\n[lots]\n");
    for lot in &instance.lots {
        let _ = write!(out, "{}, {}", lot.id, lot.label);
        for c in &lot.capacity {
            let _ = write!(out, ", {c}");
        }
        out.push('\n');
    }

    out.push_str("\n[demand]\n");
    for b in &instance.buildings {
        let _ = write!(out, "{}, {}", b.id, b.label);
        for d in &b.demand {
            let _ = write!(out, ", {d}");
        }
        out.push('\n');
    }

    out.push_str("\n[distance]\n");
    for (j, row) in instance.distances.rows().iter().enumerate() {
        let _ = write!(out, "{}", j + 1);
        for d in row {
            let _ = write!(out, ", {d}");
        }
        out.push('\n');
    }
    out
}
