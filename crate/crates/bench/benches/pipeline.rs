// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wscr_bench::{broker, candidates, ontology, query};
use wscr_core::matcher::{match_services, DEFAULT_THRESHOLD};
use wscr_core::ranker::{rank_services, NoRatings, PreferenceWeights};

const SIZES: [usize; 3] = [100, 1_000, 10_000];

fn matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("match_services");
    let onto = ontology();
    let q = query();
    for n in SIZES {
        let b = broker(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| {
                match_services(black_box(&q), b.store(), &onto, DEFAULT_THRESHOLD, &[]).unwrap()
            })
        });
    }
    group.finish();
}

fn ranking(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank_services");
    let prefs = PreferenceWeights::uniform();
    for n in SIZES {
        let cands = candidates(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| {
                rank_services(black_box(cands.clone()), &prefs, None, &NoRatings, 0.2).unwrap()
            })
        });
    }
    group.finish();
}

fn discovery(c: &mut Criterion) {
    let mut group = c.benchmark_group("discover");
    let q = query();
    for n in SIZES {
        let b = broker(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| b.discover(black_box(&q)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, matching, ranking, discovery);
criterion_main!(benches);
