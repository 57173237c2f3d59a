//! Minimum-cost flow with arc lower bounds.
//!
//! Lower bounds are removed by the usual transformation: each arc's mandatory
//! flow is pre-sent, shifting `lower` units of supply from its tail to its
//! head, and the arc keeps `capacity − lower` of residual room. The resulting
//! node imbalances are attached to an auxiliary super source and super sink,
//! and successive shortest paths (Dijkstra on reduced costs with node
//! potentials) route them. The mandatory flow is added back at the end.
//!
//! Optimality is certified separately: [`certify`] runs Bellman-Ford on the
//! residual graph of the final flow and returns node potentials under which
//! every arc satisfies complementary slackness, or reports a negative cycle.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use thiserror::Error;

/// One arc of a flow problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArcSpec {
    pub tail: usize,
    pub head: usize,
    pub lower: i64,
    pub capacity: i64,
    pub cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution {
    /// Flow on each input arc, in input order.
    pub flow: Vec<i64>,
    pub cost: i64,
    /// Shortest-path augmentations performed.
    pub augmentations: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlowError {
    #[error("supplies do not balance (net {0})")]
    Unbalanced(i64),
    #[error("arc {arc}: {reason}")]
    BadArc { arc: usize, reason: &'static str },
    /// `blocking` lists the lower-bounded arcs on the sink side of the final
    /// minimum cut; their bounds cannot all be met.
    #[error("no feasible flow: {shortfall} units of mandatory flow cannot be routed")]
    Infeasible {
        shortfall: i64,
        blocking: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy)]
struct Edge {
    to: usize,
    rev: usize,
    cap: i64,
    cost: i64,
}

struct Residual {
    edges: Vec<Vec<Edge>>,
}

impl Residual {
    fn new(nodes: usize) -> Self {
        Self {
            edges: vec![Vec::new(); nodes],
        }
    }

    /// Returns the (node, slot) of the forward edge.
    fn add(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> (usize, usize) {
        let fwd = self.edges[from].len();
        let bwd = self.edges[to].len() + usize::from(from == to);
        self.edges[from].push(Edge {
            to,
            rev: bwd,
            cap,
            cost,
        });
        self.edges[to].push(Edge {
            to: from,
            rev: fwd,
            cap: 0,
            cost: -cost,
        });
        (from, fwd)
    }

    fn push(&mut self, node: usize, slot: usize, amount: i64) {
        let e = self.edges[node][slot];
        self.edges[node][slot].cap -= amount;
        self.edges[e.to][e.rev].cap += amount;
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.edges.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for e in &self.edges[u] {
                if e.cap > 0 && !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }
}

fn check_input(supply: &[i64], arcs: &[ArcSpec]) -> Result<(), FlowError> {
    let net: i64 = supply.iter().sum();
    if net != 0 {
        return Err(FlowError::Unbalanced(net));
    }
    let n = supply.len();
    for (idx, a) in arcs.iter().enumerate() {
        let reason = if a.tail >= n || a.head >= n {
            Some("endpoint out of range")
        } else if a.lower < 0 {
            Some("negative lower bound")
        } else if a.capacity < a.lower {
            Some("capacity below lower bound")
        } else if a.cost < 0 {
            Some("negative cost")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(FlowError::BadArc { arc: idx, reason });
        }
    }
    Ok(())
}

/// Solves min Σ cost·flow subject to flow conservation against `supply`
/// (positive = source) and `lower ≤ flow ≤ capacity` on every arc.
///
/// Costs must be nonnegative. The result is integral. Runs are deterministic:
/// ties in Dijkstra resolve by node index and arcs are scanned in input order.
pub fn min_cost_flow(supply: &[i64], arcs: &[ArcSpec]) -> Result<FlowSolution, FlowError> {
    check_input(supply, arcs)?;
    let n = supply.len();
    let source = n;
    let sink = n + 1;
    let mut g = Residual::new(n + 2);

    let mut excess = supply.to_vec();
    let mut handles = Vec::with_capacity(arcs.len());
    for a in arcs {
        excess[a.tail] -= a.lower;
        excess[a.head] += a.lower;
        handles.push(g.add(a.tail, a.head, a.capacity - a.lower, a.cost));
    }
    let mut required = 0;
    for (v, &b) in excess.iter().enumerate() {
        if b > 0 {
            g.add(source, v, b, 0);
            required += b;
        } else if b < 0 {
            g.add(v, sink, -b, 0);
        }
    }

    let mut potential = vec![0i64; n + 2];
    let mut dist = vec![i64::MAX; n + 2];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n + 2];
    let mut routed = 0;
    let mut augmentations = 0;

    while routed < required {
        dist.fill(i64::MAX);
        parent.fill(None);
        dist[source] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0i64, source)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for (slot, e) in g.edges[u].iter().enumerate() {
                if e.cap <= 0 {
                    continue;
                }
                let nd = d + e.cost + potential[u] - potential[e.to];
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    parent[e.to] = Some((u, slot));
                    heap.push(Reverse((nd, e.to)));
                }
            }
        }
        if dist[sink] == i64::MAX {
            break;
        }
        for v in 0..n + 2 {
            if dist[v] != i64::MAX {
                potential[v] += dist[v];
            }
        }

        let mut bottleneck = required - routed;
        let mut v = sink;
        while let Some((u, slot)) = parent[v] {
            bottleneck = bottleneck.min(g.edges[u][slot].cap);
            v = u;
        }
        let mut v = sink;
        while let Some((u, slot)) = parent[v] {
            g.push(u, slot, bottleneck);
            v = u;
        }
        routed += bottleneck;
        augmentations += 1;
    }

    if routed < required {
        let reach = g.reachable_from(source);
        let blocking = arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.lower > 0 && !reach[a.tail])
            .map(|(i, _)| i)
            .collect();
        return Err(FlowError::Infeasible {
            shortfall: required - routed,
            blocking,
        });
    }

    let flow: Vec<i64> = arcs
        .iter()
        .zip(&handles)
        .map(|(a, &(u, slot))| a.capacity - g.edges[u][slot].cap)
        .collect();
    let cost = arcs.iter().zip(&flow).map(|(a, f)| a.cost * f).sum();
    Ok(FlowSolution {
        flow,
        cost,
        augmentations,
    })
}

/// Reduced cost `cost + π(tail) − π(head)`.
#[inline]
pub fn reduced_cost(arc: &ArcSpec, potentials: &[i64]) -> i64 {
    arc.cost + potentials[arc.tail] - potentials[arc.head]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateViolation {
    Bounds {
        arc: usize,
        flow: i64,
    },
    Conservation {
        node: usize,
        imbalance: i64,
    },
    /// Flow below capacity but reduced cost negative.
    CanIncrease {
        arc: usize,
        reduced_cost: i64,
    },
    /// Flow above the lower bound but reduced cost positive.
    CanDecrease {
        arc: usize,
        reduced_cost: i64,
    },
}

/// Builds optimality potentials for `flow` by Bellman-Ford over its
/// residual graph. Returns `None` if the residual graph has a negative
/// cycle, i.e. the flow is not optimal.
pub fn certify(node_count: usize, arcs: &[ArcSpec], flow: &[i64]) -> Option<Vec<i64>> {
    // Residual arcs as (from, to, cost).
    let mut residual = Vec::with_capacity(arcs.len() * 2);
    for (a, &f) in arcs.iter().zip(flow) {
        if f < a.capacity {
            residual.push((a.tail, a.head, a.cost));
        }
        if f > a.lower {
            residual.push((a.head, a.tail, -a.cost));
        }
    }
    // Virtual root joined to every node at cost 0.
    let mut dist = vec![0i64; node_count];
    for _ in 0..=node_count {
        let mut changed = false;
        for &(u, v, c) in &residual {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
                changed = true;
            }
        }
        if !changed {
            let shift = dist.iter().copied().min().unwrap_or(0);
            return Some(dist.into_iter().map(|d| d - shift).collect());
        }
    }
    None
}

/// Checks feasibility and complementary slackness of `flow` under
/// `potentials`. An empty result proves the flow optimal.
pub fn verify_certificate(
    supply: &[i64],
    arcs: &[ArcSpec],
    flow: &[i64],
    potentials: &[i64],
) -> Vec<CertificateViolation> {
    let mut out = Vec::new();
    let mut balance = supply.to_vec();
    for (idx, (a, &f)) in arcs.iter().zip(flow).enumerate() {
        if f < a.lower || f > a.capacity {
            out.push(CertificateViolation::Bounds { arc: idx, flow: f });
        }
        balance[a.tail] -= f;
        balance[a.head] += f;
        let rc = reduced_cost(a, potentials);
        if f < a.capacity && rc < 0 {
            out.push(CertificateViolation::CanIncrease {
                arc: idx,
                reduced_cost: rc,
            });
        }
        if f > a.lower && rc > 0 {
            out.push(CertificateViolation::CanDecrease {
                arc: idx,
                reduced_cost: rc,
            });
        }
    }
    for (node, &b) in balance.iter().enumerate() {
        if b != 0 {
            out.push(CertificateViolation::Conservation { node, imbalance: b });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(tail: usize, head: usize, lower: i64, capacity: i64, cost: i64) -> ArcSpec {
        ArcSpec {
            tail,
            head,
            lower,
            capacity,
            cost,
        }
    }

    #[test]
    fn picks_cheaper_route() {
        // 0 -> 1 -> 3 costs 2, 0 -> 2 -> 3 costs 5; capacities force a split.
        let arcs = [
            arc(0, 1, 0, 3, 1),
            arc(1, 3, 0, 3, 1),
            arc(0, 2, 0, 10, 2),
            arc(2, 3, 0, 10, 3),
        ];
        let sol = min_cost_flow(&[5, 0, 0, -5], &arcs).unwrap();
        assert_eq!(sol.flow, vec![3, 3, 2, 2]);
        assert_eq!(sol.cost, 3 * 2 + 2 * 5);
        let pi = certify(4, &arcs, &sol.flow).unwrap();
        assert!(verify_certificate(&[5, 0, 0, -5], &arcs, &sol.flow, &pi).is_empty());
    }

    #[test]
    fn lower_bound_forces_expensive_arc() {
        let arcs = [arc(0, 1, 0, 10, 1), arc(0, 1, 4, 10, 7)];
        let sol = min_cost_flow(&[6, -6], &arcs).unwrap();
        assert_eq!(sol.flow, vec![2, 4]);
        assert_eq!(sol.cost, 2 + 28);
        let pi = certify(2, &arcs, &sol.flow).unwrap();
        assert!(verify_certificate(&[6, -6], &arcs, &sol.flow, &pi).is_empty());
    }

    #[test]
    fn unmet_lower_bound_is_infeasible() {
        let arcs = [arc(0, 1, 0, 10, 1), arc(0, 1, 7, 10, 7)];
        match min_cost_flow(&[6, -6], &arcs) {
            Err(FlowError::Infeasible {
                shortfall,
                blocking,
            }) => {
                assert_eq!(shortfall, 1);
                assert_eq!(blocking, vec![1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(min_cost_flow(&[1, 0], &[]), Err(FlowError::Unbalanced(1)));
        assert!(matches!(
            min_cost_flow(&[0, 0], &[arc(0, 1, 0, 1, -1)]),
            Err(FlowError::BadArc { arc: 0, .. })
        ));
        assert!(matches!(
            min_cost_flow(&[0, 0], &[arc(0, 1, 3, 1, 0)]),
            Err(FlowError::BadArc { .. })
        ));
    }

    #[test]
    fn certify_detects_suboptimal_flow() {
        let arcs = [arc(0, 1, 0, 10, 1), arc(0, 1, 0, 10, 7)];
        assert!(certify(2, &arcs, &[0, 6]).is_none());
        let pi = certify(2, &arcs, &[6, 0]).unwrap();
        assert!(!verify_certificate(&[6, -6], &arcs, &[0, 6], &pi).is_empty());
    }

    #[test]
    fn empty_problem() {
        let sol = min_cost_flow(&[], &[]).unwrap();
        assert!(sol.flow.is_empty());
        assert_eq!(sol.cost, 0);
    }
}
