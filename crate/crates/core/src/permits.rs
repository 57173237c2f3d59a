//! Permit over-issuance.
//!
//! Every lot that is not fully reserved gets a permit count A_k chosen so that
//! all permit holders face the same chance of finding a space. The common
//! standardized slack Ψ solves
//!
//! ```text
//! n'·Ψ² − 2Ψ·Σ√N_k − 2(p·T_U' − Σ N_k) = 0
//! ```
//!
//! over the n' participating lots, where T_U' is the user count left after
//! fully reserved lots take exactly their capacity. Each participating lot
//! then receives
//!
//! ```text
//! A_k = (2N_k + Ψ² − 2Ψ√N_k) / 2p
//! ```
//!
//! and the real-valued counts are apportioned to integers by largest
//! remainder so that Σ A_k = T_U.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{derived_totals, validate_instance, ProblemInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PermitError {
    #[error("degenerate quadratic: leading coefficient is zero")]
    DegenerateQuadratic,
    #[error("service-level quadratic has no real root (discriminant {discriminant})")]
    NoRealRoot { discriminant: f64 },
    #[error("every lot is fully reserved: {users} users for {spaces} reserved spaces")]
    AllLotsReserved { users: i64, spaces: i64 },
    #[error("permit issuance infeasible: {0}")]
    Infeasible(String),
    #[error("instance has validation errors")]
    InvalidInstance,
}

/// Both real roots of `a·x² + b·x + c`, smaller first.
///
/// Uses the cancellation-free form `q = −(b + sign(b)·√disc)/2`,
/// roots `q/a` and `c/q`.
pub fn solve_quadratic(a: f64, b: f64, c: f64) -> Result<(f64, f64), PermitError> {
    if a == 0.0 {
        return Err(PermitError::DegenerateQuadratic);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 || disc.is_nan() {
        return Err(PermitError::NoRealRoot { discriminant: disc });
    }
    let sqrt_disc = disc.sqrt();
    let q = -0.5 * (b + if b >= 0.0 { sqrt_disc } else { -sqrt_disc });
    if q == 0.0 {
        // b = 0 and disc = 0, hence c = 0: double root at zero.
        return Ok((0.0, 0.0));
    }
    let (r1, r2) = (q / a, c / q);
    Ok(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// Coefficients of the service-level quadratic for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Lot indices that take part (not fully reserved).
    pub participating_lots: Vec<usize>,
    /// n'.
    pub effective_lot_count: usize,
    /// T_U' = T_U minus the capacity of fully reserved lots.
    pub effective_users: i64,
}

pub fn build_quadratic(instance: &ProblemInstance) -> Result<ServiceQuadratic, PermitError> {
    let totals = derived_totals(instance);
    let participating: Vec<usize> = (0..instance.lots.len())
        .filter(|&k| !instance.is_fully_reserved(k))
        .collect();
    let reserved_only: i64 = (0..instance.lots.len())
        .filter(|&k| instance.is_fully_reserved(k))
        .map(|k| totals.spaces_per_lot[k])
        .sum();
    if participating.is_empty() {
        return Err(PermitError::AllLotsReserved {
            users: totals.total_users,
            spaces: reserved_only,
        });
    }
    let effective_users = totals.total_users - reserved_only;
    let sum_sqrt: f64 = participating
        .iter()
        .map(|&k| (totals.spaces_per_lot[k] as f64).sqrt())
        .sum();
    let sum_spaces: i64 = participating
        .iter()
        .map(|&k| totals.spaces_per_lot[k])
        .sum();
    let p = instance.arrival_probability;
    Ok(ServiceQuadratic {
        a: participating.len() as f64,
        b: -2.0 * sum_sqrt,
        c: -2.0 * (p * effective_users as f64 - sum_spaces as f64),
        effective_lot_count: participating.len(),
        participating_lots: participating,
        effective_users,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootChoice {
    Low,
    High,
}

/// Ψ together with everything that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceLevel {
    pub psi: f64,
    pub quadratic: ServiceQuadratic,
    pub roots: (f64, f64),
    pub chosen_root: RootChoice,
}

/// Per-lot permit counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermitIssuance {
    /// A_k, one per lot.
    pub per_lot: Vec<i64>,
    /// A_k before apportionment; equals `per_lot` for fully reserved lots.
    pub unrounded: Vec<f64>,
    /// `None` when no quadratic was solved.
    pub service_level: Option<ServiceLevel>,
    /// Lot indices with A_k = N_k by policy.
    pub fully_reserved_lots: Vec<usize>,
}

impl PermitIssuance {
    /// Permit counts supplied directly, without service-level provenance.
    pub fn from_counts(per_lot: Vec<i64>) -> Self {
        Self {
            unrounded: per_lot.iter().map(|&a| a as f64).collect(),
            per_lot,
            service_level: None,
            fully_reserved_lots: Vec::new(),
        }
    }

    pub fn total(&self) -> i64 {
        self.per_lot.iter().sum()
    }
}

/// Real-valued A_k for a lot of `spaces` spaces at slack `psi`.
pub fn permits_for_lot(spaces: i64, psi: f64, p: f64) -> f64 {
    let n = spaces as f64;
    (2.0 * n + psi * psi - 2.0 * psi * n.sqrt()) / (2.0 * p)
}

/// Standardized slack (N − p·A)/√(p(1−p)·A) of a lot with A permits.
pub fn service_deviate(spaces: i64, permits: f64, p: f64) -> f64 {
    (spaces as f64 - p * permits) / (p * (1.0 - p) * permits).sqrt()
}

/// Largest-remainder rounding of `values` to integers summing to `target`.
///
/// Each value is floored, then the shortfall is handed out one unit at a time
/// in order of decreasing fractional part (ties to the lower index). A
/// negative shortfall takes units back from the smallest fractional parts.
pub fn apportion(values: &[f64], target: i64) -> Vec<i64> {
    let mut out: Vec<i64> = values.iter().map(|v| v.floor() as i64).collect();
    if out.is_empty() {
        return out;
    }
    let frac: Vec<f64> = values.iter().map(|v| v - v.floor()).collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    let mut shortfall = target - out.iter().sum::<i64>();
    if shortfall >= 0 {
        order.sort_by(|&x, &y| frac[y].total_cmp(&frac[x]).then(x.cmp(&y)));
        for &i in order.iter().cycle().take(shortfall as usize) {
            out[i] += 1;
        }
    } else {
        order.sort_by(|&x, &y| frac[x].total_cmp(&frac[y]).then(x.cmp(&y)));
        let mut guard = 0;
        while shortfall < 0 && guard < order.len() * 2 + (-shortfall) as usize {
            let i = order[guard % order.len()];
            if out[i] > 0 {
                out[i] -= 1;
                shortfall += 1;
            }
            guard += 1;
        }
    }
    out
}

pub fn compute_permits(instance: &ProblemInstance) -> Result<PermitIssuance, PermitError> {
    if validate_instance(instance).has_errors() {
        return Err(PermitError::InvalidInstance);
    }
    let totals = derived_totals(instance);
    let n = instance.lots.len();
    let fully_reserved_lots: Vec<usize> =
        (0..n).filter(|&k| instance.is_fully_reserved(k)).collect();

    let quadratic = match build_quadratic(instance) {
        Ok(q) => q,
        Err(PermitError::AllLotsReserved { users, spaces }) => {
            if users != spaces {
                return Err(PermitError::AllLotsReserved { users, spaces });
            }
            let per_lot = totals.spaces_per_lot.clone();
            return Ok(PermitIssuance {
                unrounded: per_lot.iter().map(|&a| a as f64).collect(),
                per_lot,
                service_level: None,
                fully_reserved_lots,
            });
        }
        Err(e) => return Err(e),
    };

    let roots = solve_quadratic(quadratic.a, quadratic.b, quadratic.c)?;
    let psi = roots.0;
    if psi.is_nan() || psi <= 0.0 {
        return Err(PermitError::Infeasible(format!(
            "smaller root {psi:.6} is not positive; {} users after reserved lots do not \
             overload {} participating lots",
            quadratic.effective_users, quadratic.effective_lot_count
        )));
    }

    let p = instance.arrival_probability;
    let shares: Vec<f64> = quadratic
        .participating_lots
        .iter()
        .map(|&k| permits_for_lot(totals.spaces_per_lot[k], psi, p))
        .collect();
    let rounded = apportion(&shares, quadratic.effective_users);

    let mut per_lot = totals.spaces_per_lot.clone();
    let mut unrounded: Vec<f64> = per_lot.iter().map(|&a| a as f64).collect();
    for ((&k, &a), &real) in quadratic
        .participating_lots
        .iter()
        .zip(&rounded)
        .zip(&shares)
    {
        per_lot[k] = a;
        unrounded[k] = real;
    }
    debug_assert_eq!(per_lot.iter().sum::<i64>(), totals.total_users);

    Ok(PermitIssuance {
        per_lot,
        unrounded,
        service_level: Some(ServiceLevel {
            psi,
            quadratic,
            roots,
            chosen_root: RootChoice::Low,
        }),
        fully_reserved_lots,
    })
}
