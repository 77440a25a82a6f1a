use criterion::{criterion_group, criterion_main, Criterion};
use twinbeam::propagator::stitch_naive;
use twinbeam::{design_domains, stitch, FrequencyGrid, MediumSpec, PmfTarget, PumpSpectrum};

fn bench_stitch(c: &mut Criterion) {
    let n_domains = 200;
    let grid = FrequencyGrid::symmetric(6.0, 51).unwrap();
    let medium = MediumSpec::symmetric(4.1, 2.0, 1.0, 1.0, n_domains).unwrap();
    let pump = PumpSpectrum::new(1.0, 1.0, 2.0).unwrap();
    let profile = design_domains(&PmfTarget::new(1.0 / 4.1, 1.0).unwrap(), n_domains)
        .unwrap()
        .profile;
    let mut g = c.benchmark_group("stitch");
    g.sample_size(10);
    g.bench_function("chunked", |b| {
        b.iter(|| stitch(&profile, &grid, &medium, &pump).unwrap())
    });
    g.bench_function("naive", |b| {
        b.iter(|| stitch_naive(&profile, &grid, &medium, &pump, true).unwrap())
    });
    g.finish();
}

criterion_group!(benches, bench_stitch);
criterion_main!(benches);
