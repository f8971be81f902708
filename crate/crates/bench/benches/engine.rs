use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use exactgeom::build_surface_s;
use exactgeom::elimination::run_elimination_on;
use exactgeom::incidence::Threefold;
use exactgeom::scroll::{instance_from_seed, verify_instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn lattice(c: &mut Criterion) {
    c.bench_function("surface n=16", |b| b.iter(|| build_surface_s(black_box(16)).unwrap()));
}

fn incidence(c: &mut Criterion) {
    let mut g = c.benchmark_group("incidence");
    g.sample_size(10);
    g.bench_function("pairing table n=10", |b| b.iter(|| Threefold::new(black_box(10)).unwrap()));
    let tf = Threefold::new(10).unwrap();
    g.bench_function("elimination n=10", |b| b.iter(|| run_elimination_on(black_box(&tf)).unwrap()));
    g.finish();
}

fn scroll(c: &mut Criterion) {
    let mut g = c.benchmark_group("scroll");
    g.sample_size(10);
    let inst = instance_from_seed(8, 1).unwrap();
    g.bench_function("verify instance n=8", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            verify_instance(black_box(&inst), 8, &mut rng).unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, lattice, incidence, scroll);
criterion_main!(benches);
