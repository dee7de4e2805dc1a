use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dpxa_core::{
    dcca, dfa, fluctuation_dpxa, gen_bfbm_increments, gen_fgn, rho_curve, BfbmSpec, DetrendConfig,
    FgnSpec, ForceMatrix, QGrid, ScaleGrid,
};
use std::hint::black_box;

fn generators(c: &mut Criterion) {
    let mut g = c.benchmark_group("generate");
    for n in [1 << 12, 1 << 14, 1 << 16] {
        g.bench_with_input(BenchmarkId::new("fgn", n), &n, |b, &n| {
            b.iter(|| {
                gen_fgn(&FgnSpec {
                    hurst: 0.7,
                    length: n,
                    seed: 1,
                })
                .unwrap()
            })
        });
        g.bench_with_input(BenchmarkId::new("bfbm", n), &n, |b, &n| {
            let spec = BfbmSpec {
                hurst_x: 0.3,
                hurst_y: 0.6,
                corr: 0.5,
                length: n,
                seed: 1,
            };
            b.iter(|| gen_bfbm_increments(&spec).unwrap())
        });
    }
    g.finish();
}

fn fluctuations(c: &mut Criterion) {
    let n = 1 << 14;
    let z = gen_fgn(&FgnSpec {
        hurst: 0.8,
        length: n,
        seed: 3,
    })
    .unwrap();
    let (x, y) = gen_bfbm_increments(&BfbmSpec {
        hurst_x: 0.3,
        hurst_y: 0.6,
        corr: 0.5,
        length: n,
        seed: 4,
    })
    .unwrap();
    let grid = ScaleGrid::default_for(n).unwrap();
    let q2 = QGrid::second_order();
    let qs = QGrid::linspace(-4.0, 4.0, 17).unwrap();
    let cfg = DetrendConfig::default();
    let forces = ForceMatrix::single(z.clone());

    let mut g = c.benchmark_group("fluctuation_2^14");
    g.sample_size(20);
    g.bench_function("dfa", |b| {
        b.iter(|| dfa(black_box(&x), &grid, &q2, &cfg).unwrap())
    });
    g.bench_function("dcca", |b| {
        b.iter(|| dcca(&x, &y, &grid, &q2, &cfg).unwrap())
    });
    g.bench_function("dpxa", |b| {
        b.iter(|| fluctuation_dpxa(&x, &y, &forces, &grid, &q2, &cfg).unwrap())
    });
    g.bench_function("mfdpxa_17q", |b| {
        b.iter(|| fluctuation_dpxa(&x, &y, &forces, &grid, &qs, &cfg).unwrap())
    });
    g.bench_function("rho_dpxa", |b| {
        b.iter(|| rho_curve(&x, &y, &forces, &grid, &cfg).unwrap())
    });
    for order in [1, 3] {
        let cfg = DetrendConfig::polynomial(order);
        g.bench_with_input(BenchmarkId::new("dpxa_order", order), &cfg, |b, cfg| {
            b.iter(|| fluctuation_dpxa(&x, &y, &forces, &grid, &q2, cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, generators, fluctuations);
criterion_main!(benches);
