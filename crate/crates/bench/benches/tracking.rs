use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use std::time::Duration;
use waring_core::monodromy::{generate_start_instance, triangle_loop};
use waring_core::{MonodromyOptions, ProblemSpec};

fn bench_triangle_loop(c: &mut Criterion) {
    let opts = MonodromyOptions::default();
    for (name, degrees, k) in [("d22_k3", vec![2, 2], 3), ("d2333_k6", vec![2, 3, 3, 3], 6)] {
        let spec = ProblemSpec::new(2, degrees).unwrap();
        let (point, params) = generate_start_instance(&spec, k, 1).unwrap();
        let known = vec![point];
        c.bench_function(&format!("triangle_loop/{name}"), |b| {
            b.iter(|| triangle_loop(black_box(&spec), k, &params, &known, 7, &opts).unwrap())
        });
    }
}

fn criterion_config() -> Criterion {
    Criterion::default()
        .measurement_time(Duration::from_secs(10))
        .sample_size(20)
}

criterion_group!(
    name = benches;
    config = criterion_config();
    targets = bench_triangle_loop
);
criterion_main!(benches);
