use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64 as C;

use sims_bench::{pair, sector_oscillator, unit_schedule};
use sims_core::mextend::{PoleRoute, ScanConfig};
use sims_core::rangegeom::build_default_region;
use sims_core::resolventops::{random_bump, ResolventConfig};
use sims_core::weyl::LimitConfig;
use sims_core::{complex_gamma, integrate_pair, limit_disk, pole_scan, CoefficientProblem, Rect, Resolvent};

fn special(c: &mut Criterion) {
    c.bench_function("complex_gamma", |b| b.iter(|| complex_gamma(black_box(C::new(3.7, 2.1)))));
}

fn ode(c: &mut Criterion) {
    let p = sector_oscillator();
    let lam = C::new(-1.0, 1.0);
    let eta = pair(&p, lam).eta;
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    c.bench_function("integrate_pair/oscillator_6pts", |b| b.iter(|| integrate_pair(&p, black_box(lam), eta, &xs, 1e-10)));
}

fn disks(c: &mut Criterion) {
    let p = sector_oscillator();
    let s = unit_schedule(&p, 6);
    let lam = C::new(-1.0, 1.0);
    let pr = pair(&p, lam);
    let cfg = LimitConfig::default();
    c.bench_function("limit_disk/oscillator", |b| b.iter(|| limit_disk(&p, &pr, black_box(lam), &s, &cfg)));
    c.bench_function("build_default_region/oscillator", |b| b.iter(|| build_default_region(black_box(&p))));
}

fn resolvent(c: &mut Criterion) {
    let p = CoefficientProblem::free(C::new(0.0, 0.0));
    let lam = C::new(0.0, 1.0);
    let s = sims_core::make_schedule(p.interval, 4.0, 2.0, 5).unwrap();
    let r = Resolvent::new(&p, &pair(&p, lam), lam, &s, &ResolventConfig::default()).unwrap();
    let f = random_bump(1, 1.1, 4.1, 5);
    c.bench_function("resolvent_check/free_bump", |b| b.iter(|| r.check(&|x| f.eval(x), 4.1)));
}

fn scan(c: &mut Criterion) {
    let f = |z: C| -> sims_core::Result<C> { Ok((z - C::new(0.3, 0.2)) * (z + C::new(0.5, -0.4)) * (z * z + 4.0)) };
    let mut g = c.benchmark_group("pole_scan");
    g.sample_size(20);
    g.bench_function("cubic_quartic", |b| {
        b.iter(|| pole_scan(&PoleRoute::Function(&f), Rect::new(-1.0, -1.0, 1.0, 1.0), &ScanConfig::default()))
    });
    g.finish();
}

criterion_group!(benches, special, ode, disks, resolvent, scan);
criterion_main!(benches);
