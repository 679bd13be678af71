use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pseudogeo::catalog;
use pseudogeo::exec;
use pseudogeo::families::{family_case_c_isotropic, FamilyConfig};
use pseudogeo::{integrate_geodesic, Exec, IntegratorOptions, ProjectiveDirection, ProjectiveJet};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn c_family(c: &mut Criterion) {
    let m = catalog::ex1exp();
    let alphas = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
    let mut g = c.benchmark_group("c1 family");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = FamilyConfig { exec, ..FamilyConfig::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| family_case_c_isotropic(&m, [0.0, 0.0], black_box(&alphas), &cfg).unwrap())
        });
    }
    g.finish();
}

fn batch(c: &mut Criterion) {
    let m = catalog::dd(-1.0);
    let b = m.bbox;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let jets: Vec<ProjectiveJet> = (0..64)
        .map(|_| {
            let th: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            ProjectiveJet::new(rng.gen_range(b.xmin..b.xmax), rng.gen_range(b.ymin..b.ymax), ProjectiveDirection::from_vector(th.cos(), th.sin()))
        })
        .collect();
    let mut opts = IntegratorOptions::default();
    opts.bbox = Some(b);
    let mut g = c.benchmark_group("batch of 64 geodesics");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |bch| {
            bch.iter(|| exec::map(mode, black_box(&jets), |j| integrate_geodesic(&m, j, 2.0, &opts).map(|c| c.samples.len())))
        });
    }
    g.finish();
}

criterion_group!(benches, c_family, batch);
criterion_main!(benches);
