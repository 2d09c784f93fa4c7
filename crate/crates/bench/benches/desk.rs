//! Desk-scale benchmarks for the exact-arithmetic hot paths: rational
//! Gaussian elimination, the cubed perturbation sweep of the worst-case
//! evaluator, total-variation merges, and the joint-enumeration DP.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use ordlab_core::dist::EnumBudget;
use ordlab_core::googol::{build_transition_matrix, level_secretary_dp, stationary_distribution};
use ordlab_core::osi::build_osi_pairs;
use ordlab_core::rankguess::{worst_case_expected_reward, NamedPolicy, RankGuessInstance};

fn bench_stationary(c: &mut Criterion) {
    let mut group = c.benchmark_group("stationary");
    group.sample_size(10);
    for n in [5usize, 6] {
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| {
                let chain = build_transition_matrix(black_box(n)).unwrap();
                stationary_distribution(&chain).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_worst_case(c: &mut Criterion) {
    let values: Vec<u128> = (0..6).map(|i| 25 + 20 * i + 9 * i * i).collect();
    let inst = RankGuessInstance::uniform(values, 1_000_000).unwrap();
    c.bench_function("worst_case_mono_n6", |b| {
        b.iter(|| worst_case_expected_reward(black_box(&inst), &NamedPolicy::MonoGaps).unwrap())
    });
}

fn bench_tv_distance(c: &mut Criterion) {
    let d1 = build_osi_pairs(101).unwrap();
    let d2 = build_osi_pairs(99).unwrap();
    c.bench_function("tv_distance_pairs101_vs_99", |b| {
        b.iter(|| black_box(&d1).tv_distance(black_box(&d2)))
    });
}

fn bench_level_dp(c: &mut Criterion) {
    let budget = EnumBudget::default();
    let mut group = c.benchmark_group("level_dp");
    group.sample_size(10);
    for n in [4usize, 5] {
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| level_secretary_dp(black_box(n), &budget).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    desk,
    bench_stationary,
    bench_worst_case,
    bench_tv_distance,
    bench_level_dp
);
criterion_main!(desk);
