use amgpoly_core::amg::{build_hierarchy, vcycle_apply};
use amgpoly_core::problems::poisson3d;
use amgpoly_core::smoothers::{l1_jacobi_diag, smoother_apply_into, SmootherScratch};
use amgpoly_core::sparse::{fused_update, unfused_update};
use amgpoly_core::{CoarseSolver, CoarseningConfig, HierarchyLimits, PolySmootherConfig, SmootherFamily};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn spmv(c: &mut Criterion) {
    let mut g = c.benchmark_group("spmv");
    for m in [16, 32] {
        let (a, _) = poisson3d(m).unwrap();
        let x = random_vec(a.nrows(), 1);
        let mut y = vec![0.0; a.nrows()];
        g.throughput(Throughput::Elements(a.nnz() as u64));
        g.bench_with_input(BenchmarkId::new("serial", m), &m, |b, _| {
            b.iter(|| a.spmv_into(black_box(&x), &mut y).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("rayon", m), &m, |b, _| {
            b.iter(|| a.par_spmv_into(black_box(&x), &mut y).unwrap())
        });
    }
    g.finish();
}

fn fused(c: &mut Criterion) {
    let n = 1 << 20;
    let s = random_vec(n, 2);
    let (mut r, mut d, mut x) = (random_vec(n, 3), random_vec(n, 4), random_vec(n, 5));
    let mut g = c.benchmark_group("chebyshev_update");
    g.throughput(Throughput::Elements(n as u64));
    g.bench_function("fused", |b| b.iter(|| fused_update(0.9, 0.8, 0.1, black_box(&s), &mut r, &mut d, &mut x).unwrap()));
    g.bench_function("unfused", |b| {
        b.iter(|| unfused_update(0.9, 0.8, 0.1, black_box(&s), &mut r, &mut d, &mut x).unwrap())
    });
    g.finish();
}

fn smoothers(c: &mut Criterion) {
    let (a, rhs) = poisson3d(24).unwrap();
    let m = l1_jacobi_diag(&a).unwrap();
    let mut scratch = SmootherScratch::new(a.nrows());
    let mut g = c.benchmark_group("smoother");
    for family in SmootherFamily::ALL {
        for k in [2, 4, 6] {
            let cfg = PolySmootherConfig::new(family, k).unwrap();
            let mut x = vec![0.0; a.nrows()];
            g.bench_with_input(BenchmarkId::new(family.name(), k), &k, |b, _| {
                b.iter(|| smoother_apply_into(&cfg, &a, &m, black_box(&rhs), &mut x, &mut scratch).unwrap())
            });
        }
    }
    g.finish();
}

fn vcycle(c: &mut Criterion) {
    let (a, rhs) = poisson3d(24).unwrap();
    let mut g = c.benchmark_group("vcycle");
    g.sample_size(20);
    for (name, coarsening) in [("matching", CoarseningConfig::matching()), ("sa", CoarseningConfig::smoothed_aggregation())] {
        let cfg = PolySmootherConfig::new(SmootherFamily::OptCheb1, 4).unwrap();
        let h = build_hierarchy(&a, &coarsening, &cfg, HierarchyLimits::default(), CoarseSolver::default()).unwrap();
        g.bench_function(name, |b| b.iter(|| vcycle_apply(&h, black_box(&rhs)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, spmv, fused, smoothers, vcycle);
criterion_main!(benches);
