#![allow(dead_code)]

use parkalloc::{
    Building, DistanceMatrix, ParkingLot, PermitIssuance, PermitType, ProblemInstance,
};
use rand::Rng;

/// Random instance with 1–2 permit types, 1–3 buildings, 1–3 lots, demands
/// and distances in 0..=5, and a random permit vector summing to T_U.
/// Capacities are small so the reserved bounds are sometimes unmeetable.
pub fn random_small_case<R: Rng>(rng: &mut R) -> (ProblemInstance, PermitIssuance) {
    let l = rng.gen_range(1..=2);
    let m = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=3);
    random_case(rng, l, m, n, 5, 5, 3)
}

pub fn random_case<R: Rng>(
    rng: &mut R,
    l: usize,
    m: usize,
    n: usize,
    max_demand: i64,
    max_distance: i64,
    max_capacity: i64,
) -> (ProblemInstance, PermitIssuance) {
    let permit_types = (0..l)
        .map(|i| PermitType {
            id: i + 1,
            label: format!("T{}", i + 1),
            reserved: i == 0 && l > 1,
        })
        .collect();
    let buildings: Vec<Building> = (0..m)
        .map(|j| Building {
            id: j + 1,
            label: format!("B{}", j + 1),
            demand: (0..l).map(|_| rng.gen_range(0..=max_demand)).collect(),
        })
        .collect();
    let lots = (0..n)
        .map(|k| ParkingLot {
            id: k + 1,
            label: format!("L{}", k + 1),
            capacity: (0..l).map(|_| rng.gen_range(0..=max_capacity)).collect(),
        })
        .collect();
    let distances = DistanceMatrix::from_rows(
        (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0..=max_distance)).collect())
            .collect(),
    );
    let users: i64 = buildings.iter().flat_map(|b| &b.demand).sum();
    let instance = ProblemInstance {
        permit_types,
        buildings,
        lots,
        distances,
        arrival_probability: 0.7,
    };
    (
        instance,
        PermitIssuance::from_counts(random_composition(rng, users, n)),
    )
}

/// Uniformly placed cut points split `total` into `parts` nonnegative parts.
pub fn random_composition<R: Rng>(rng: &mut R, total: i64, parts: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (0..parts - 1).map(|_| rng.gen_range(0..=total)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(total - prev);
    out
}
