use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use parkalloc::{
    compute_permits, fixtures, simulate_arrivals, solve, Building, DistanceMatrix, ParkingLot,
    PermitType, ProblemInstance,
};

/// Campus-shaped instance with `m` buildings and `n` lots. Distances follow a
/// fixed arithmetic pattern so runs are comparable.
fn campus(m: usize, n: usize) -> ProblemInstance {
    let lots: Vec<ParkingLot> = (0..n)
        .map(|k| ParkingLot {
            id: k + 1,
            label: format!("Lot {}", k + 1),
            capacity: vec![20 + (k as i64 * 7) % 30, 100 + (k as i64 * 37) % 200],
        })
        .collect();
    let reserved: i64 = lots.iter().map(|l| l.capacity[0]).sum();
    let spaces: i64 = lots.iter().map(|l| l.total_capacity()).sum();
    let users = spaces * 5 / 4;
    let buildings = (0..m)
        .map(|j| {
            let share = |total: i64| total / m as i64 + i64::from((j as i64) < total % m as i64);
            Building {
                id: j + 1,
                label: format!("Building {}", j + 1),
                demand: vec![share(reserved), share(users - reserved)],
            }
        })
        .collect();
    let rows = (0..m)
        .map(|j| {
            (0..n)
                .map(|k| 50 + ((j * 131 + k * 71) % 400) as i64)
                .collect()
        })
        .collect();
    ProblemInstance {
        permit_types: vec![
            PermitType {
                id: 1,
                label: "Reserved".into(),
                reserved: true,
            },
            PermitType {
                id: 2,
                label: "Unreserved".into(),
                reserved: false,
            },
        ],
        buildings,
        lots,
        distances: DistanceMatrix::from_rows(rows),
        arrival_probability: 0.7,
    }
}

fn bench_permits(c: &mut Criterion) {
    let inst = fixtures::ukzn_westville();
    c.bench_function("permits/campus", |b| {
        b.iter(|| compute_permits(black_box(&inst)))
    });
}

fn bench_solve(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve");
    let inst = fixtures::ukzn_westville_reconciled();
    let permits = compute_permits(&inst).unwrap();
    for mode in [true, false] {
        let name = if mode {
            "campus/reserved"
        } else {
            "campus/unreserved"
        };
        group.bench_function(name, |b| {
            b.iter(|| solve(black_box(&inst), black_box(&permits), mode).unwrap())
        });
    }
    for (m, n) in [(50, 20), (200, 60)] {
        let inst = campus(m, n);
        let permits = compute_permits(&inst).unwrap();
        group.bench_with_input(
            BenchmarkId::new("synthetic", format!("{m}x{n}")),
            &inst,
            |b, inst| b.iter(|| solve(inst, &permits, true).unwrap()),
        );
    }
    group.finish();
}

fn bench_simulate(c: &mut Criterion) {
    let inst = fixtures::ukzn_westville();
    let permits = compute_permits(&inst).unwrap();
    c.bench_function("simulate/campus_1000_trials", |b| {
        b.iter(|| simulate_arrivals(&permits, &inst, 1000, black_box(7)))
    });
}

criterion_group!(benches, bench_permits, bench_solve, bench_simulate);
criterion_main!(benches);
