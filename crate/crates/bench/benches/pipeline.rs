use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DVector;
use se2group::mean_field::{omega_matrix, simulate_nonlinear};
use se2group::spectral::{full_spectrum, top_eigenpair, DEFAULT_MAX_ITER};
use se2group::{
    build_affinity, estimate_kernel, extract_units, generate_fhh_stimulus, DiagonalPolicy, FpParams, KernelConfig,
    MeanFieldParams, StimulusConfig,
};
use std::hint::black_box;

fn kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel");
    group.sample_size(10);
    for paths in [300, 3000] {
        let config = KernelConfig::new(FpParams {
            n_paths: paths,
            ..FpParams::default()
        });
        group.bench_function(format!("estimate_{paths}_paths"), |b| {
            b.iter(|| estimate_kernel(black_box(&config)).unwrap())
        });
    }
    group.finish();
}

fn grouping(c: &mut Criterion) {
    let omega = estimate_kernel(&KernelConfig::default()).unwrap().omega;
    let stimulus = generate_fhh_stimulus(&StimulusConfig::default()).unwrap();
    let affinity = build_affinity(&stimulus, &omega, 1.0, 1.0, DiagonalPolicy::SelfAffinity).unwrap();

    let mut group = c.benchmark_group("grouping");
    group.bench_function("build_affinity_150", |b| {
        b.iter(|| build_affinity(black_box(&stimulus), &omega, 1.0, 1.0, DiagonalPolicy::SelfAffinity).unwrap())
    });
    group.bench_function("power_iteration_150", |b| {
        b.iter(|| top_eigenpair(black_box(affinity.entries()), 1e-10, DEFAULT_MAX_ITER).unwrap())
    });
    group.bench_function("dense_spectrum_150", |b| {
        b.iter(|| full_spectrum(black_box(affinity.entries())).unwrap())
    });
    group.bench_function("extract_units_150", |b| {
        b.iter(|| extract_units(black_box(&affinity), &Default::default()).unwrap())
    });
    group.finish();
}

fn dynamics(c: &mut Criterion) {
    let omega = estimate_kernel(&KernelConfig::default()).unwrap().omega;
    let stimulus = generate_fhh_stimulus(&StimulusConfig::default()).unwrap();
    let w = omega_matrix(&omega, stimulus.elements(), stimulus.angle_mode());
    let p = MeanFieldParams::default();
    let n = stimulus.len();
    let h = vec![p.c; n];
    let a0 = DVector::<f64>::zeros(n);

    let mut group = c.benchmark_group("dynamics");
    group.sample_size(20);
    group.bench_function("nonlinear_rk4_150x500", |b| {
        b.iter(|| simulate_nonlinear(black_box(&w), &h, a0.as_slice(), &p).unwrap())
    });
    group.finish();
}

criterion_group!(benches, kernel, grouping, dynamics);
criterion_main!(benches);
