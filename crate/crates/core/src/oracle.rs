//! Exhaustive reference solver for small allocation instances.
//!
//! Walks every integral tensor X whose rows satisfy Σ_k X_ijk = P_ij, one
//! composition of P_ij per (permit type, building) group, in lexicographic
//! order of the flattened tensor. Branches are cut only when they can no
//! longer satisfy the lot totals or reserved bounds, or cannot beat the
//! incumbent. The first minimum found is therefore the lexicographically
//! smallest optimal tensor.
//!
//! Shares no code with the flow solver; it is the independent check on it.

use thiserror::Error;

use crate::model::{AllocationPlan, ProblemInstance};
use crate::permits::PermitIssuance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    /// Upper limit on partial assignments visited.
    pub max_states: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            max_states: 20_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration budget of {0} states exceeded")]
    BudgetExceeded(u64),
    #[error("no integral allocation satisfies the constraints")]
    Infeasible,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

struct Search<'a> {
    instance: &'a ProblemInstance,
    permits: &'a [i64],
    reserved_mode: bool,
    l: usize,
    m: usize,
    n: usize,
    cells: Vec<i64>,
    lot_sum: Vec<i64>,
    type_lot_sum: Vec<i64>,
    /// Demand of type i in groups after the current one, indexed by group.
    type_demand_after: Vec<i64>,
    /// Cheapest possible cost of all groups from this one onward.
    cost_floor_from: Vec<i64>,
    best: Option<(i64, Vec<i64>)>,
    states: u64,
    budget: u64,
}

impl Search<'_> {
    fn group_of(&self, cell: usize) -> (usize, usize, usize) {
        let k = cell % self.n;
        let j = (cell / self.n) % self.m;
        let i = cell / (self.n * self.m);
        (i, j, k)
    }

    /// Can the reserved bounds of type `i` still be met with `remaining`
    /// more type-i users to place?
    fn reserved_reachable(&self, i: usize, remaining: i64) -> bool {
        let missing: i64 = (0..self.n)
            .map(|k| (self.instance.capacity(i, k) - self.type_lot_sum[i * self.n + k]).max(0))
            .sum();
        missing <= remaining
    }

    fn dfs(&mut self, cell: usize, left_in_group: i64, cost: i64) -> Result<(), OracleError> {
        self.states += 1;
        if self.states > self.budget {
            return Err(OracleError::BudgetExceeded(self.budget));
        }
        if cell == self.cells.len() {
            return self.leaf(cost);
        }
        let (i, j, k) = self.group_of(cell);
        let group = i * self.m + j;
        let room = self.permits[k] - self.lot_sum[k];
        let (lo, hi) = if k + 1 == self.n {
            (left_in_group, left_in_group)
        } else {
            (0, left_in_group.min(room))
        };
        if lo > room {
            return Ok(());
        }
        let d = self.instance.distance(j, k);
        for x in lo..=hi {
            self.cells[cell] = x;
            self.lot_sum[k] += x;
            self.type_lot_sum[i * self.n + k] += x;
            let cost = cost + d * x;

            let mut proceed = true;
            let next_left = left_in_group - x;
            if k + 1 == self.n {
                // Group done: prune on reserved reachability and cost.
                if self.reserved_mode && !self.reserved_reachable(i, self.type_demand_after[group])
                {
                    proceed = false;
                }
                if let Some((best, _)) = &self.best {
                    let floor = self.cost_floor_from.get(group + 1).copied().unwrap_or(0);
                    if cost + floor >= *best {
                        proceed = false;
                    }
                }
            }
            if proceed {
                let next_cell = cell + 1;
                let carry = if k + 1 == self.n {
                    self.group_demand(next_cell)
                } else {
                    next_left
                };
                self.dfs(next_cell, carry, cost)?;
            }

            self.lot_sum[k] -= x;
            self.type_lot_sum[i * self.n + k] -= x;
        }
        self.cells[cell] = 0;
        Ok(())
    }

    fn group_demand(&self, cell: usize) -> i64 {
        if cell == self.cells.len() {
            return 0;
        }
        let (i, j, _) = self.group_of(cell);
        self.instance.demand(i, j)
    }

    fn leaf(&mut self, cost: i64) -> Result<(), OracleError> {
        if self.lot_sum.iter().zip(self.permits).any(|(s, a)| s != a) {
            return Ok(());
        }
        if self.reserved_mode {
            for i in 0..self.l {
                for k in 0..self.n {
                    if self.type_lot_sum[i * self.n + k] < self.instance.capacity(i, k) {
                        return Ok(());
                    }
                }
            }
        }
        if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
            self.best = Some((cost, self.cells.clone()));
        }
        Ok(())
    }
}

pub fn brute_force_optimum(
    instance: &ProblemInstance,
    permits: &PermitIssuance,
    reserved_mode: bool,
    budget: EnumerationBudget,
) -> Result<AllocationPlan, OracleError> {
    let dims = instance.dims();
    let (l, m, n) = (dims.permit_types, dims.buildings, dims.lots);
    if permits.per_lot.len() != n {
        return Err(OracleError::DimensionMismatch(format!(
            "{} permit counts for {n} lots",
            permits.per_lot.len()
        )));
    }
    let users: i64 = instance.buildings.iter().flat_map(|b| &b.demand).sum();
    if permits.total() != users {
        return Err(OracleError::Infeasible);
    }
    if dims.is_empty() {
        return if reserved_mode
            && instance
                .lots
                .iter()
                .flat_map(|l| &l.capacity)
                .any(|&c| c > 0)
        {
            Err(OracleError::Infeasible)
        } else {
            Ok(AllocationPlan::new(dims, Vec::new(), 0, reserved_mode))
        };
    }

    let groups = l * m;
    let mut type_demand_after = vec![0i64; groups];
    for i in 0..l {
        let mut acc = 0;
        for j in (0..m).rev() {
            type_demand_after[i * m + j] = acc;
            acc += instance.demand(i, j);
        }
    }
    let mut cost_floor_from = vec![0i64; groups + 1];
    for g in (0..groups).rev() {
        let (i, j) = (g / m, g % m);
        let nearest = (0..n).map(|k| instance.distance(j, k)).min().unwrap_or(0);
        cost_floor_from[g] = cost_floor_from[g + 1] + instance.demand(i, j) * nearest;
    }

    let mut search = Search {
        instance,
        permits: &permits.per_lot,
        reserved_mode,
        l,
        m,
        n,
        cells: vec![0; dims.len()],
        lot_sum: vec![0; n],
        type_lot_sum: vec![0; l * n],
        type_demand_after,
        cost_floor_from,
        best: None,
        states: 0,
        budget: budget.max_states,
    };
    let first = instance.demand(0, 0);
    search.dfs(0, first, 0)?;
    match search.best {
        Some((cost, cells)) => Ok(AllocationPlan::new(dims, cells, cost, reserved_mode)),
        None => Err(OracleError::Infeasible),
    }
}
