use criterion::{criterion_group, criterion_main, Criterion};
use microset::covers::{greedy_strong_cover, verify_cover};
use microset::dust::{generate, gap_table, survivor_refute, swallow_cover, epsilon_star_lower};
use microset::{DigitalSet, DustSpec, Precision, Scalar};

fn dust(c: &mut Criterion) {
    let spec = DustSpec::new(2, 3, 3).unwrap();
    c.bench_function("generate n=2 K=3", |b| b.iter(|| generate(&spec).unwrap()));
    c.bench_function("gap_table n=2 K=3", |b| b.iter(|| gap_table(&spec).unwrap()));

    let prec = Precision::default();
    let tree = generate(&spec).unwrap();
    let eps = epsilon_star_lower(&spec, &prec).unwrap();
    let cover = swallow_cover(&tree, &eps, 3).unwrap();
    c.bench_function("survivor_refute n=2 K=3", |b| {
        b.iter(|| survivor_refute(&tree, &cover, &prec).unwrap().unwrap())
    });
}

fn covers(c: &mut Criterion) {
    let prec = Precision::default();
    let cells: Vec<Vec<u64>> = (0..20).map(|i| vec![(i * 37) % 81, (i * 11) % 81]).collect();
    let e = DigitalSet::new(2, 3, 4, cells).unwrap();
    let eps = Scalar::ratio(1, 2);
    c.bench_function("greedy_strong_cover 20 cells", |b| {
        b.iter(|| greedy_strong_cover(&e, &eps, 64, &prec).unwrap())
    });
    let cover = greedy_strong_cover(&e, &eps, 64, &prec).unwrap().unwrap();
    c.bench_function("verify_cover 20 cells", |b| b.iter(|| verify_cover(&e, &cover).unwrap()));
}

criterion_group!(benches, dust, covers);
criterion_main!(benches);
