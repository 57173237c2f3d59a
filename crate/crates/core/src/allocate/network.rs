//! The allocation model as a layered flow network.
//!
//! ```text
//! source ──P_ij──▶ group(i,j) ──D_jk──▶ pair(i,k) ──[M_ik,∞)──▶ lot(k) ──A_k──▶ sink
//! ```
//!
//! The source supplies T_U and each source arc has capacity P_ij, so every
//! group node passes on exactly its demand. Lot arcs have capacity A_k and the
//! sink absorbs T_U, so every lot receives exactly its permits. Walking arcs
//! carry the distance cost. With the reserved policy on, each pair arc has
//! lower bound M_ik. Flow on walk arc (i,j,k) is X_ijk.

use serde::{Deserialize, Serialize};

use super::mcf::ArcSpec;
use super::AllocateError;
use crate::model::{derived_totals, Dimensions, ProblemInstance};
use crate::permits::PermitIssuance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Source,
    Group { permit_type: usize, building: usize },
    Pair { permit_type: usize, lot: usize },
    Lot { lot: usize },
    Sink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    Supply {
        permit_type: usize,
        building: usize,
    },
    Walk {
        permit_type: usize,
        building: usize,
        lot: usize,
    },
    Reserve {
        permit_type: usize,
        lot: usize,
    },
    Permit {
        lot: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkArc {
    pub tail: usize,
    pub head: usize,
    pub lower: i64,
    pub capacity: i64,
    pub cost: i64,
    pub kind: ArcKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowNetwork {
    pub nodes: Vec<NodeKind>,
    /// Net supply per node (positive at the source, negative at the sink).
    pub supply: Vec<i64>,
    /// Arcs in lexicographic order within each layer.
    pub arcs: Vec<NetworkArc>,
    pub dims: Dimensions,
    pub reserved_mode: bool,
}

impl FlowNetwork {
    pub fn arc_specs(&self) -> Vec<ArcSpec> {
        self.arcs
            .iter()
            .map(|a| ArcSpec {
                tail: a.tail,
                head: a.head,
                lower: a.lower,
                capacity: a.capacity,
                cost: a.cost,
            })
            .collect()
    }

    pub fn total_supply(&self) -> i64 {
        self.supply.iter().filter(|&&s| s > 0).sum()
    }

    pub fn lower_bounded_arcs(&self) -> impl Iterator<Item = &NetworkArc> {
        self.arcs.iter().filter(|a| a.lower > 0)
    }

    pub fn node_index(&self, kind: NodeKind) -> Option<usize> {
        let d = self.dims;
        let (l, m, n) = (d.permit_types, d.buildings, d.lots);
        match kind {
            NodeKind::Source => Some(0),
            NodeKind::Group {
                permit_type,
                building,
            } if permit_type < l && building < m => Some(1 + permit_type * m + building),
            NodeKind::Pair { permit_type, lot } if permit_type < l && lot < n => {
                Some(1 + l * m + permit_type * n + lot)
            }
            NodeKind::Lot { lot } if lot < n => Some(1 + l * m + l * n + lot),
            NodeKind::Sink => Some(1 + l * m + l * n + n),
            _ => None,
        }
    }
}

pub fn build_network(
    instance: &ProblemInstance,
    permits: &PermitIssuance,
    reserved_mode: bool,
) -> Result<FlowNetwork, AllocateError> {
    let dims = instance.dims();
    let (l, m, n) = (dims.permit_types, dims.buildings, dims.lots);
    if permits.per_lot.len() != n {
        return Err(AllocateError::DimensionMismatch(format!(
            "{} permit counts for {n} lots",
            permits.per_lot.len()
        )));
    }
    let totals = derived_totals(instance);
    let users = totals.total_users;
    if permits.total() != users {
        return Err(AllocateError::PermitMismatch {
            permits: permits.total(),
            users,
        });
    }
    if let Some(k) = permits.per_lot.iter().position(|&a| a < 0) {
        return Err(AllocateError::DimensionMismatch(format!(
            "negative permit count for lot {}",
            k + 1
        )));
    }

    let mut net = FlowNetwork {
        nodes: Vec::with_capacity(2 + l * m + l * n + n),
        supply: Vec::new(),
        arcs: Vec::with_capacity(l * m + l * m * n + l * n + n),
        dims,
        reserved_mode,
    };
    net.nodes.push(NodeKind::Source);
    for permit_type in 0..l {
        for building in 0..m {
            net.nodes.push(NodeKind::Group {
                permit_type,
                building,
            });
        }
    }
    for permit_type in 0..l {
        for lot in 0..n {
            net.nodes.push(NodeKind::Pair { permit_type, lot });
        }
    }
    for lot in 0..n {
        net.nodes.push(NodeKind::Lot { lot });
    }
    net.nodes.push(NodeKind::Sink);
    net.supply = vec![0; net.nodes.len()];
    net.supply[0] = users;
    *net.supply.last_mut().unwrap() = -users;

    let idx = |net: &FlowNetwork, kind| net.node_index(kind).expect("node in range");
    let unbounded = users;

    for permit_type in 0..l {
        for building in 0..m {
            let head = idx(
                &net,
                NodeKind::Group {
                    permit_type,
                    building,
                },
            );
            net.arcs.push(NetworkArc {
                tail: 0,
                head,
                lower: 0,
                capacity: instance.demand(permit_type, building),
                cost: 0,
                kind: ArcKind::Supply {
                    permit_type,
                    building,
                },
            });
        }
    }
    for permit_type in 0..l {
        for building in 0..m {
            let tail = idx(
                &net,
                NodeKind::Group {
                    permit_type,
                    building,
                },
            );
            for lot in 0..n {
                let head = idx(&net, NodeKind::Pair { permit_type, lot });
                net.arcs.push(NetworkArc {
                    tail,
                    head,
                    lower: 0,
                    capacity: unbounded,
                    cost: instance.distance(building, lot),
                    kind: ArcKind::Walk {
                        permit_type,
                        building,
                        lot,
                    },
                });
            }
        }
    }
    for permit_type in 0..l {
        for lot in 0..n {
            let tail = idx(&net, NodeKind::Pair { permit_type, lot });
            let head = idx(&net, NodeKind::Lot { lot });
            let lower = if reserved_mode {
                instance.capacity(permit_type, lot)
            } else {
                0
            };
            net.arcs.push(NetworkArc {
                tail,
                head,
                lower,
                capacity: unbounded.max(lower),
                cost: 0,
                kind: ArcKind::Reserve { permit_type, lot },
            });
        }
    }
    let sink = idx(&net, NodeKind::Sink);
    for lot in 0..n {
        let tail = idx(&net, NodeKind::Lot { lot });
        net.arcs.push(NetworkArc {
            tail,
            head: sink,
            lower: 0,
            capacity: permits.per_lot[lot],
            cost: 0,
            kind: ArcKind::Permit { lot },
        });
    }
    Ok(net)
}
