use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use qv_core::algebra::ZigzagAlgebra;
use qv_core::bimodule::{reflect_direct, reflect_tensor};
use qv_core::harness::{builtin_graph, item_rng, orbit_point};

fn bench(c: &mut Criterion) {
    for name in ["A3", "affA2"] {
        let g = builtin_graph(name).unwrap();
        let alg = Arc::new(ZigzagAlgebra::new(&g, 4));
        let (p, cc) = orbit_point(&alg, 3, 3, &mut item_rng(7, name));
        c.bench_function(&format!("reflect_tensor {name}"), |b| b.iter(|| reflect_tensor(&alg, &p, &cc, 0).unwrap()));
        c.bench_function(&format!("reflect_direct {name}"), |b| b.iter(|| reflect_direct(&p, &cc, 0).unwrap()));
    }
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench
}
criterion_main!(benches);
