use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpetpf::euler::GasConstants;
use fpetpf::filters::{feature_preserving_analysis, Ensemble, etpf_analysis};
use fpetpf::harness::problems::{sample_initial_ensemble, solver};
use fpetpf::harness::{ExperimentConfig, Problem, Scale};
use fpetpf::transport::{distance_matrix, WeightVector};
use fpetpf::{exec, Backend};

const BACKENDS: [Backend; 2] = [Backend::Sequential, Backend::Parallel];

fn setup(problem: Problem, nx: usize) -> (ExperimentConfig, GasConstants, Vec<fpetpf::euler::FlowState>) {
    let mut cfg = ExperimentConfig::preset(problem, Scale::Desk);
    cfg.nx = nx;
    if problem.dim() == 2 {
        cfg.ny = nx;
    }
    let gas = GasConstants::default();
    let ensemble = sample_initial_ensemble(&cfg, &gas).unwrap();
    (cfg, gas, ensemble)
}

fn skewed(n: usize) -> WeightVector {
    WeightVector::normalized((0..n).map(|k| (k + 1) as f64).collect()).unwrap()
}

fn forecast(c: &mut Criterion) {
    let (cfg, gas, ensemble) = setup(Problem::Sod, 501);
    let mut group = c.benchmark_group("forecast_sod_501");
    group.sample_size(10);
    for backend in BACKENDS {
        let s = solver(&cfg, &gas).with_backend(backend);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{backend:?}")), &backend, |b, &backend| {
            b.iter(|| exec::try_map(backend, &ensemble, |x| s.advance(x, 0.01)).unwrap())
        });
    }
    group.finish();
}

fn analysis(c: &mut Criterion) {
    let (_, gas, particles) = setup(Problem::Sod, 501);
    let ens = Ensemble::uniform(particles).unwrap();
    let w = skewed(ens.len());
    let mut group = c.benchmark_group("analysis_sod_501");
    group.sample_size(10);
    for backend in BACKENDS {
        group.bench_with_input(BenchmarkId::new("etpf", format!("{backend:?}")), &backend, |b, &backend| {
            b.iter(|| etpf_analysis(&ens, &w, &gas, backend).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fp-etpf", format!("{backend:?}")), &backend, |b, &backend| {
            b.iter(|| feature_preserving_analysis(&ens, &w, &gas, &Default::default(), backend).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("distances", format!("{backend:?}")), &backend, |b, &backend| {
            b.iter(|| distance_matrix(ens.particles(), backend))
        });
    }
    group.finish();
}

fn blast_analysis(c: &mut Criterion) {
    let (_, gas, particles) = setup(Problem::Blast2d, 51);
    let ens = Ensemble::uniform(particles).unwrap();
    let w = skewed(ens.len());
    let mut group = c.benchmark_group("analysis_blast_51");
    group.sample_size(10);
    for backend in BACKENDS {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{backend:?}")), &backend, |b, &backend| {
            b.iter(|| feature_preserving_analysis(&ens, &w, &gas, &Default::default(), backend).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, forecast, analysis, blast_analysis);
criterion_main!(benches);
