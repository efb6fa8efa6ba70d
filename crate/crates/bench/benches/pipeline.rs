use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use sqdopt_bench::{hamiltonian, sqdopt_context};
use sqdopt_core::{
    davidson_ground, greedy_group, jw_map, project, sector_determinants, sqdopt_cost, DavidsonConfig, LucjParameters,
};

fn mapping(c: &mut Criterion) {
    let mut g = c.benchmark_group("jw_map");
    for name in ["h4_0.9", "h6_0.9", "h8_0.9"] {
        let h = hamiltonian(name, 0);
        g.bench_with_input(BenchmarkId::from_parameter(name), &h, |b, h| b.iter(|| jw_map(black_box(h))));
    }
    g.finish();
}

fn grouping(c: &mut Criterion) {
    let mut g = c.benchmark_group("greedy_group");
    for name in ["h6_0.9", "h8_0.9"] {
        let p = jw_map(&hamiltonian(name, 2));
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| b.iter(|| greedy_group(black_box(p))));
    }
    g.finish();
}

fn davidson(c: &mut Criterion) {
    let mut g = c.benchmark_group("davidson");
    g.sample_size(10);
    for name in ["h8_0.9", "h10_0.9"] {
        let h = hamiltonian(name, 2);
        let dets = sector_determinants(h.n_orbitals(), h.n_alpha(), h.n_beta()).unwrap();
        let problem = project(&h, &dets).unwrap();
        let cfg = DavidsonConfig::default();
        g.bench_with_input(BenchmarkId::from_parameter(name), &problem, |b, p| b.iter(|| davidson_ground(black_box(p), &cfg).unwrap()));
    }
    g.finish();
}

fn cost(c: &mut Criterion) {
    let mut g = c.benchmark_group("sqdopt_cost");
    g.sample_size(10);
    for (name, shots) in [("h6_0.9", 10_000), ("h8_0.9", 10_000)] {
        let ctx = sqdopt_context(name, 2, 5, shots);
        let n_orb = ctx.hamiltonian.n_orbitals();
        let x = LucjParameters::random(n_orb, 1, ctx.mask.clone(), 0.1, 0).to_vector();
        let params = ctx.parameters(&x).unwrap();
        g.bench_function(name, |b| b.iter(|| sqdopt_cost(black_box(&params), &ctx, 0).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, mapping, grouping, davidson, cost);
criterion_main!(benches);
