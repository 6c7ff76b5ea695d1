use criterion::{black_box, criterion_group, criterion_main, Criterion};
use qv_core::scalars::{parse_scalar, FMatrix};

fn matrix(n: usize, m: u32) -> FMatrix {
    let mut a = FMatrix::zeros(m, n, n);
    for r in 0..n {
        for c in 0..n {
            let s = format!("{}*t^{} + z^{}", (r * 3 + c * 5) % 7 + 1, (r + c) % 3, r % 3);
            a.set(r, c, parse_scalar(&s, m).unwrap());
        }
    }
    a
}

fn bench(c: &mut Criterion) {
    let x = parse_scalar("(t^3 + z*t - 2)/(t^2 + 1)", 4).unwrap();
    let y = parse_scalar("(z^3*t + 5)/(t - z)", 4).unwrap();
    c.bench_function("ratfunc mul+add m=4", |b| {
        b.iter(|| black_box(&x).try_mul(black_box(&y)).unwrap().try_add(&x).unwrap())
    });
    let a = matrix(4, 4);
    c.bench_function("rank 4x4 over Q(zeta_4)(t)", |b| b.iter(|| black_box(&a).rank()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench
}
criterion_main!(benches);
