//! Throughput of the clipping kernels, single optimizer steps and a full
//! stiff-quadratic run.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use softclip_core::clip::{catalogue, ClipScheme};
use softclip_core::optim::{default_start, run, step, Method, OptimizerSpec, OptimizerState};
use softclip_core::problems::stiff_diag_quadratic;
use softclip_core::schedule::StepSchedule;

fn random_grad(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.gen_range(-1e3..1e3)).collect()
}

fn bench_scalar_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("scalar_g_h");
    for scheme in catalogue() {
        group.bench_with_input(
            BenchmarkId::new("g", scheme.name()),
            &scheme,
            |b, s: &ClipScheme| {
                b.iter(|| s.g(black_box(3.7), black_box(0.05)).unwrap());
            },
        );
        group.bench_with_input(
            BenchmarkId::new("h", scheme.name()),
            &scheme,
            |b, s: &ClipScheme| {
                b.iter(|| s.h(black_box(3.7), black_box(0.05)).unwrap());
            },
        );
    }
    group.finish();
}

fn bench_vector_lift(c: &mut Criterion) {
    let grad = random_grad(1000, 7);
    let mut group = c.benchmark_group("apply_g_1000");
    for scheme in catalogue() {
        group.bench_with_input(
            BenchmarkId::from_parameter(scheme.name()),
            &scheme,
            |b, s: &ClipScheme| {
                b.iter(|| s.apply_g(black_box(&grad), black_box(0.05)).unwrap());
            },
        );
    }
    group.finish();
}

fn bench_steps(c: &mut Criterion) {
    let dim = 50;
    let grad = random_grad(dim, 11);
    let methods = vec![
        Method::Sgd,
        Method::SoftClipCw {
            scheme: ClipScheme::tamed(1.0 / 3.0).unwrap(),
        },
        Method::SoftClipNorm { gamma: 1.0 },
        Method::SgdMomentum { mu: 0.9 },
        Method::HardClip { gamma_c: 1.0 },
        Method::adam_defaults(),
    ];
    let mut group = c.benchmark_group("step_d50");
    for method in methods {
        let spec = OptimizerSpec {
            method: method.clone(),
            schedule: StepSchedule::Constant { beta: 1e-3 },
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(method.name()),
            &spec,
            |b, spec| {
                b.iter_batched(
                    || OptimizerState::new(&spec.method, vec![1.0; dim]),
                    |mut state| step(spec, &mut state, black_box(&grad)).unwrap(),
                    criterion::BatchSize::SmallInput,
                );
            },
        );
    }
    group.finish();
}

fn bench_full_run(c: &mut Criterion) {
    let problem = stiff_diag_quadratic(7.9e-2, 3.8e4, 50, 1.0);
    let spec = OptimizerSpec {
        method: Method::SoftClipCw {
            scheme: ClipScheme::tamed(1.0 / 3.0).unwrap(),
        },
        schedule: StepSchedule::Constant { beta: 0.1 },
    };
    let w1 = default_start(50);
    c.bench_function("run_stiff_480_iters", |b| {
        b.iter(|| run(&spec, &problem, &w1, black_box(0), 480, 480).unwrap());
    });
}

criterion_group!(
    benches,
    bench_scalar_kernels,
    bench_vector_lift,
    bench_steps,
    bench_full_run
);
criterion_main!(benches);
