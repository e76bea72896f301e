//! End-to-end diagnostic checks on real ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softclip_core::clip::ClipScheme;
use softclip_core::diagnostics::{
    bound_constants, estimate_third_moment, gd_bound_comparison, min_grad_sq_bound, min_grad_trace,
    moment_track, verify_descent,
};
use softclip_core::optim::{default_start, run, Method, OptimizerSpec};
use softclip_core::problems::{stiff_diag_quadratic, strongly_convex_quadratic, Problem};
use softclip_core::schedule::StepSchedule;
use softclip_core::RunRecord;

fn tamed_default() -> ClipScheme {
    ClipScheme::tamed(softclip_core::DEFAULT_TAMED_GAMMA).unwrap()
}

fn ensemble(
    spec: &OptimizerSpec,
    problem: &dyn Problem,
    w1: &[f64],
    seeds: &[u64],
    iters: u64,
    record_every: u64,
) -> Vec<RunRecord> {
    seeds
        .iter()
        .map(|&s| run(spec, problem, w1, s, iters, record_every).unwrap())
        .collect()
}

#[test]
fn min_grad_bound_holds_on_noise_free_problems() {
    // With zero noise and interpolation, the bound built from the trajectory
    // moment estimate must dominate the seed-averaged running minimum at
    // every horizon. Runs are deterministic, so the margin is structural.
    let problems: Vec<Box<dyn Problem>> = vec![
        Box::new(strongly_convex_quadratic(1.0, 10.0, 10, 0.0)),
        Box::new(stiff_diag_quadratic(7.9e-2, 100.0, 10, 0.0)),
    ];
    let scheme = tamed_default();
    let spec = OptimizerSpec {
        method: Method::SoftClipCw { scheme },
        schedule: StepSchedule::InverseLinear {
            beta: 0.5,
            gamma: 1.0,
        },
    };
    for problem in problems {
        let w1 = default_start(problem.dim());
        let records = ensemble(&spec, problem.as_ref(), &w1, &[0, 1, 2, 3, 4], 10_000, 1);
        let m_est = estimate_third_moment(&records).unwrap();
        let constants = bound_constants(problem.as_ref(), &scheme, true, Some(m_est)).unwrap();
        let b = constants.b_interpolation.unwrap();

        let f_w1 = records[0].trace[0].f_value;
        let f_star = problem.constants().f_star.unwrap();

        for k_max in [100u64, 1_000, 10_000] {
            let min_avg = records[0]
                .trace
                .iter()
                .enumerate()
                .filter(|(_, p)| p.k <= k_max)
                .map(|(i, _)| {
                    records.iter().map(|r| r.trace[i].grad_norm_sq).sum::<f64>()
                        / records.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let bound = min_grad_sq_bound(f_w1, f_star, b, &spec.schedule, k_max);
            assert!(
                min_avg <= bound,
                "{}: min grad² {min_avg:e} above bound {bound:e} at K = {k_max}",
                problem.name()
            );
        }
    }
}

#[test]
fn descent_inequality_holds_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let problems = [
        strongly_convex_quadratic(1.0, 10.0, 5, 0.0),
        strongly_convex_quadratic(1.0, 10.0, 5, 0.1),
    ];
    for problem in &problems {
        for scheme in [tamed_default(), ClipScheme::arctan()] {
            let spec = OptimizerSpec {
                method: Method::SoftClipCw { scheme },
                schedule: StepSchedule::Constant { beta: 1e-2 },
            };
            for point in 0..5 {
                let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let report = verify_descent(&spec, problem, &w, 1e-2, 2_000, 1000 + point).unwrap();
                assert!(
                    report.passed,
                    "{} on {} at point {point}: margin {}",
                    scheme.name(),
                    problem.name(),
                    report.margin
                );
            }
        }
    }
}

#[test]
fn moment_curves_plateau_on_contracting_runs() {
    let problem = stiff_diag_quadratic(7.9e-2, 100.0, 10, 0.1);
    let spec = OptimizerSpec {
        method: Method::SoftClipCw {
            scheme: tamed_default(),
        },
        schedule: StepSchedule::InverseLinear {
            beta: 0.5,
            gamma: 1.0,
        },
    };
    let w1 = default_start(10);
    let records = ensemble(&spec, &problem, &w1, &[0, 1, 2, 3, 4], 5_000, 1);
    let curves = moment_track(&records).unwrap();
    assert!(curves.holder_consistent);
    assert!(curves.empirical_third_moment.is_finite());
    // The third moment peaks at the start and decays: no late-time blow-up.
    let last = *curves.mean_dist_cubed.last().unwrap();
    let first = curves.mean_dist_cubed[0];
    assert!(
        last < first,
        "third moment should contract: first {first}, last {last}"
    );
    assert_eq!(curves.empirical_third_moment, first);
}

#[test]
fn running_min_is_nonincreasing_on_real_runs() {
    let problem = strongly_convex_quadratic(1.0, 10.0, 6, 0.1);
    let spec = OptimizerSpec {
        method: Method::SoftClipCw {
            scheme: ClipScheme::log(),
        },
        schedule: StepSchedule::InverseLinear {
            beta: 0.5,
            gamma: 1.0,
        },
    };
    let rec = run(&spec, &problem, &default_start(6), 0, 3_000, 1).unwrap();
    let zeta = min_grad_trace(&rec);
    assert!(zeta.windows(2).all(|w| w[1].1 <= w[0].1));
}

#[test]
fn gd_step_restriction_bound_is_tightest_for_small_steps() {
    let problem = strongly_convex_quadratic(1.0, 10.0, 5, 0.0);
    let schedule = StepSchedule::Constant { beta: 0.05 };
    let report = gd_bound_comparison(&problem, &schedule, 200, &default_start(5), None).unwrap();
    assert!(report.all_valid);
    let step_restriction = &report.strategies[0];
    assert!(step_restriction.hypothesis_holds);
    for other in &report.strategies[1..] {
        assert!(
            step_restriction.bound <= other.bound,
            "step-restriction bound {} should be the tightest, but {} gives {}",
            step_restriction.bound,
            other.name,
            other.bound
        );
    }
}
