//! The `verify` command: runs the configured diagnostic checks and writes a
//! pass/warn/fail report.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use softclip_core::clip::ClipScheme;
use softclip_core::diagnostics::{
    as_convergence_check, bound_constants, bound_constants_with, estimate_third_moment, fit_rate,
    gd_bound_comparison, inv_linear_min_grad_bound, inv_linear_min_grad_bound_tight,
    min_grad_sq_bound, moment_track, strongly_convex_gap_bound, verify_descent, FitOptions,
    Provenance, RateMetric, RateModel, Tagged,
};
use softclip_core::optim::{run, Method, OptimizerSpec};
use softclip_core::record::RunRecord;
use softclip_core::schedule::StepSchedule;

use crate::artifacts::{format_float, write_json, write_text};
use crate::commands::out_dir;
use crate::config::{resolve, Config, Experiment, VerifyConfig};

/// A bound violation counts as a warning rather than a failure while an
/// underestimated moment bound of up to this factor would explain it.
const M_WARN_FACTOR: f64 = 4.0;

const KNOWN_CHECKS: [&str; 6] = [
    "as_convergence",
    "descent",
    "gd_bounds",
    "min_grad_bound",
    "moments",
    "sc_gap_bound",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub status: Status,
    pub details: serde_json::Value,
    /// Per-k / per-K / per-seed tables, written as `verify/<name>.csv`.
    #[serde(skip)]
    pub tables: Vec<(String, String)>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub problem: String,
    pub method: String,
    pub schedule: String,
    pub checks: BTreeMap<String, CheckResult>,
    pub any_fail: bool,
}

impl VerifyReport {
    /// Line-oriented `key = value` rendering of the report, one scalar per
    /// line, keys flattened with dots and sorted.
    pub fn to_kv_text(&self) -> String {
        fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<String>) {
            match value {
                serde_json::Value::Object(map) => {
                    let mut keys: Vec<&String> = map.keys().collect();
                    keys.sort();
                    for k in keys {
                        flatten(&format!("{prefix}.{k}"), &map[k], out);
                    }
                }
                serde_json::Value::Array(items) => {
                    for (i, item) in items.iter().enumerate() {
                        flatten(&format!("{prefix}.{i}"), item, out);
                    }
                }
                other => out.push(format!("{prefix} = {other}")),
            }
        }
        let mut lines = vec![
            format!("problem = {}", self.problem),
            format!("method = {}", self.method),
            format!("schedule = {}", self.schedule),
            format!("any_fail = {}", self.any_fail),
        ];
        for (name, check) in &self.checks {
            lines.push(format!("{name}.status = {:?}", check.status).to_lowercase());
            flatten(name, &check.details, &mut lines);
        }
        lines.join("\n") + "\n"
    }
}

/// Run the requested checks against the first configured optimizer.
pub fn cmd_verify(config: &Config) -> Result<VerifyReport> {
    let exp = resolve(config)?;
    let out = out_dir(config);
    let default_verify = VerifyConfig {
        checks: vec![],
        use_interpolation: None,
        epsilon: None,
        descent_points: None,
        descent_samples: None,
        descent_alpha: None,
        bound_checkpoints: None,
        gd_alpha: None,
        gd_iters: None,
        fit_k_min: None,
        fit_k_max: None,
    };
    let vc = config.verify.clone().unwrap_or(default_verify);
    let checks: Vec<String> = if vc.checks.is_empty() {
        [
            "as_convergence",
            "descent",
            "gd_bounds",
            "min_grad_bound",
            "moments",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    } else {
        vc.checks.clone()
    };
    for name in &checks {
        if !KNOWN_CHECKS.contains(&name.as_str()) {
            bail!("unknown verify check `{name}` (known: {KNOWN_CHECKS:?})");
        }
    }

    let opt = &exp.optimizers[0];
    let needs_ensemble = checks.iter().any(|c| {
        matches!(
            c.as_str(),
            "min_grad_bound" | "sc_gap_bound" | "as_convergence" | "moments"
        )
    });
    let ensemble: Vec<RunRecord> = if needs_ensemble {
        exp.seeds
            .iter()
            .map(|&s| {
                run(
                    &opt.spec,
                    exp.problem.as_ref(),
                    &exp.w1,
                    s,
                    exp.iters,
                    exp.record_every,
                )
                .map_err(|e| anyhow!(e.to_string()))
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let mut results = BTreeMap::new();
    for name in &checks {
        let result = match name.as_str() {
            "descent" => check_descent(&exp, &vc)?,
            "min_grad_bound" => check_min_grad_bound(&exp, &vc, &ensemble)?,
            "sc_gap_bound" => check_sc_gap_bound(&exp, &vc, &ensemble)?,
            "as_convergence" => check_as_convergence(&vc, &ensemble)?,
            "moments" => check_moments(&ensemble)?,
            "gd_bounds" => check_gd_bounds(&exp, &vc)?,
            _ => unreachable!("validated above"),
        };
        results.insert(name.clone(), result);
    }

    let any_fail = results.values().any(|r| r.status == Status::Fail);
    let report = VerifyReport {
        problem: exp.problem.name().to_string(),
        method: opt.spec.method.describe(),
        schedule: opt.spec.schedule.describe(),
        checks: results,
        any_fail,
    };
    write_json(&out.join("verify.json"), &report)?;
    write_text(&out.join("verify.txt"), &report.to_kv_text())?;
    for (name, check) in &report.checks {
        for (suffix, csv) in &check.tables {
            write_text(&out.join(format!("verify/{name}{suffix}.csv")), csv)?;
        }
    }
    Ok(report)
}

/// The clipping scheme a method corresponds to under the clipped-update
/// template; only the component-wise family (and plain SGD as the identity)
/// fits.
fn scheme_of(method: &Method) -> Result<ClipScheme> {
    match method {
        Method::SoftClipCw { scheme } => Ok(*scheme),
        Method::Sgd => Ok(ClipScheme::identity()),
        other => bail!(
            "check applies to clipped-update methods (softclip_cw or sgd), not `{}`",
            other.name()
        ),
    }
}

fn seed_mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_descent(exp: &Experiment, vc: &VerifyConfig) -> Result<CheckResult> {
    let scheme = scheme_of(&exp.optimizers[0].spec.method)?;
    let problem = exp.problem.as_ref();
    let w_star = problem
        .constants()
        .minimizer
        .clone()
        .ok_or(softclip_core::Error::MissingConstant("minimizer"))
        .map_err(|e| anyhow!(e.to_string()))?;
    let points = vc.descent_points.unwrap_or(20);
    let alpha = vc.descent_alpha.unwrap_or(1e-2);
    let n_samples = vc.descent_samples.unwrap_or(10_000);

    let spec = OptimizerSpec {
        method: Method::SoftClipCw { scheme },
        schedule: StepSchedule::Constant { beta: alpha },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0xDE5C);
    let mut n_passed = 0;
    let mut min_margin = f64::INFINITY;
    let mut csv = String::from("point,lhs,rhs,stderr,margin,passed\n");
    for p in 0..points {
        let w: Vec<f64> = w_star
            .iter()
            .map(|v| v + rng.gen_range(-3.0..3.0))
            .collect();
        let report = verify_descent(&spec, problem, &w, alpha, n_samples, 7000 + p)
            .map_err(|e| anyhow!(e.to_string()))?;
        if report.passed {
            n_passed += 1;
        }
        min_margin = min_margin.min(report.margin);
        csv.push_str(&format!(
            "{p},{},{},{},{},{}\n",
            format_float(report.lhs),
            format_float(report.rhs),
            format_float(report.stderr),
            format_float(report.margin),
            report.passed
        ));
    }
    let status = if n_passed == points {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(CheckResult {
        status,
        details: json!({
            "scheme": scheme.name(),
            "alpha": alpha,
            "points": points,
            "n_samples": n_samples,
            "n_passed": n_passed,
            "min_margin": min_margin,
        }),
        tables: vec![(String::new(), csv)],
    })
}

fn check_min_grad_bound(
    exp: &Experiment,
    vc: &VerifyConfig,
    ensemble: &[RunRecord],
) -> Result<CheckResult> {
    let problem = exp.problem.as_ref();
    let opt = &exp.optimizers[0];
    let scheme = scheme_of(&opt.spec.method)?;
    let use_interp = vc
        .use_interpolation
        .unwrap_or_else(|| problem.interpolating());
    let m_est = estimate_third_moment(ensemble).map_err(|e| anyhow!(e.to_string()))?;
    let constants = bound_constants(problem, &scheme, use_interp, Some(m_est))
        .map_err(|e| anyhow!(e.to_string()))?;
    let b = constants.preferred();
    let f_star = problem
        .constants()
        .f_star
        .ok_or(softclip_core::Error::MissingConstant("f_star"))
        .map_err(|e| anyhow!(e.to_string()))?;
    let f_w1 = ensemble[0].trace[0].f_value;

    // Bound with an inflated moment estimate, for the warning margin.
    let b_warn = {
        let inflated = bound_constants_with(
            constants.lipschitz,
            Tagged::estimated(M_WARN_FACTOR * constants.third_moment.value),
            constants.sigma_sq,
            constants.c_g,
            constants.c_h,
            use_interp,
        );
        inflated.preferred()
    };

    let checkpoints: Vec<u64> = vc.bound_checkpoints.clone().unwrap_or_else(|| {
        let mut v = vec![exp.iters / 100, exp.iters / 10, exp.iters];
        v.retain(|&k| k >= 1);
        v.dedup();
        v
    });

    let ks: Vec<u64> = ensemble[0].trace.iter().map(|p| p.k).collect();
    let mut rows = Vec::new();
    let mut csv =
        String::from("k,lhs_min_mean_grad_sq,lhs_argmin_k,stderr,bound_exact_sums,bound_stated,bound_tight,status\n");
    let mut worst = Status::Pass;
    for &k_cap in &checkpoints {
        // Pointwise seed mean, then the minimum over recorded k ≤ cap.
        let mut best = (f64::INFINITY, 0.0, 0u64);
        for (i, &k) in ks.iter().enumerate() {
            if k > k_cap {
                break;
            }
            let vals: Vec<f64> = ensemble.iter().map(|r| r.trace[i].grad_norm_sq).collect();
            let (mean, se) = seed_mean_and_se(&vals);
            if mean < best.0 {
                best = (mean, se, k);
            }
        }
        let (lhs, se, argmin_k) = best;
        let bound = min_grad_sq_bound(f_w1, f_star, b, &opt.spec.schedule, k_cap);
        let status = if lhs <= bound + 3.0 * se {
            Status::Pass
        } else if constants.third_moment.provenance == Provenance::Estimated
            && lhs <= min_grad_sq_bound(f_w1, f_star, b_warn, &opt.spec.schedule, k_cap) + 3.0 * se
        {
            Status::Warn
        } else {
            Status::Fail
        };
        worst = worst.max(status);

        let mut row = json!({
            "k": k_cap,
            "lhs_min_mean_grad_sq": lhs,
            "lhs_argmin_k": argmin_k,
            "stderr": se,
            "bound_exact_sums": bound,
            "status": status,
        });
        let mut closed_forms = (String::new(), String::new());
        if let StepSchedule::InverseLinear { beta, gamma } = opt.spec.schedule {
            let stated = inv_linear_min_grad_bound(f_w1, f_star, b, beta, gamma, k_cap);
            let tight = inv_linear_min_grad_bound_tight(f_w1, f_star, b, beta, gamma, k_cap);
            row["bound_stated"] = json!(stated);
            row["bound_tight"] = json!(tight);
            closed_forms = (format_float(stated), format_float(tight));
        }
        csv.push_str(&format!(
            "{k_cap},{},{argmin_k},{},{},{},{},{status:?}\n",
            format_float(lhs),
            format_float(se),
            format_float(bound),
            closed_forms.0,
            closed_forms.1
        ));
        rows.push(row);
    }

    Ok(CheckResult {
        status: worst,
        details: json!({
            "b_used": b,
            "b_variance": constants.b_variance,
            "b_interpolation": constants.b_interpolation,
            "interpolation": use_interp,
            "m_estimate": constants.third_moment.value,
            "m_provenance": if constants.third_moment.is_exact() { "exact" } else { "estimated" },
            "checkpoints": rows,
        }),
        tables: vec![(String::new(), csv)],
    })
}

fn check_sc_gap_bound(
    exp: &Experiment,
    vc: &VerifyConfig,
    ensemble: &[RunRecord],
) -> Result<CheckResult> {
    let problem = exp.problem.as_ref();
    let opt = &exp.optimizers[0];
    let scheme = scheme_of(&opt.spec.method)?;
    let StepSchedule::InverseLinear { beta, gamma } = opt.spec.schedule else {
        bail!("sc_gap_bound needs an inverse-linear schedule");
    };
    let c = problem
        .constants()
        .strong_convexity
        .ok_or(softclip_core::Error::MissingConstant("strong_convexity"))
        .map_err(|e| anyhow!(e.to_string()))?;
    let f_star = problem
        .constants()
        .f_star
        .ok_or(softclip_core::Error::MissingConstant("f_star"))
        .map_err(|e| anyhow!(e.to_string()))?;
    let use_interp = vc
        .use_interpolation
        .unwrap_or_else(|| problem.interpolating());
    let m_est = estimate_third_moment(ensemble).map_err(|e| anyhow!(e.to_string()))?;
    let constants = bound_constants(problem, &scheme, use_interp, Some(m_est))
        .map_err(|e| anyhow!(e.to_string()))?;
    let b = constants.preferred();
    let b_warn = bound_constants_with(
        constants.lipschitz,
        Tagged::estimated(M_WARN_FACTOR * constants.third_moment.value),
        constants.sigma_sq,
        constants.c_g,
        constants.c_h,
        use_interp,
    )
    .preferred();
    let f_w1 = ensemble[0].trace[0].f_value;

    let ks: Vec<u64> = ensemble[0].trace.iter().map(|p| p.k).collect();
    let mut warn_points = 0u64;
    let mut fail_points = 0u64;
    let mut checked = 0u64;
    let mut csv = String::from("k,mean_gap,stderr,bound,status\n");
    for (i, &k) in ks.iter().enumerate() {
        let gaps: Vec<f64> = ensemble
            .iter()
            .map(|r| r.trace[i].f_value - f_star)
            .collect();
        let (mean, se) = seed_mean_and_se(&gaps);
        // The recorded index counts the initial point as 1; the bound's
        // counter starts at the initial point being 0.
        let bound = strongly_convex_gap_bound(f_w1, f_star, b, beta, gamma, c, k - 1)
            .map_err(|e| anyhow!(e.to_string()))?;
        checked += 1;
        let status = if mean <= bound + 3.0 * se {
            Status::Pass
        } else {
            let warn_bound = strongly_convex_gap_bound(f_w1, f_star, b_warn, beta, gamma, c, k - 1)
                .map_err(|e| anyhow!(e.to_string()))?;
            if constants.third_moment.provenance == Provenance::Estimated
                && mean <= warn_bound + 3.0 * se
            {
                warn_points += 1;
                Status::Warn
            } else {
                fail_points += 1;
                Status::Fail
            }
        };
        csv.push_str(&format!(
            "{k},{},{},{},{status:?}\n",
            format_float(mean),
            format_float(se),
            format_float(bound)
        ));
    }
    let status = if fail_points > 0 {
        Status::Fail
    } else if warn_points > 0 {
        Status::Warn
    } else {
        Status::Pass
    };

    // Informative decay-rate fit over the configured window.
    let fit = fit_rate(
        ensemble,
        &FitOptions {
            metric: RateMetric::FGap,
            model: RateModel::Power,
            k_min: vc.fit_k_min,
            k_max: vc.fit_k_max,
            f_star: Some(f_star),
        },
    );
    let fit_json = match fit {
        Ok(f) => json!({
            "exponent": f.exponent,
            "coefficient": f.coefficient,
            "residual": f.residual,
            "k_range": f.k_range,
            "n_points": f.n_points,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };

    Ok(CheckResult {
        status,
        details: json!({
            "beta": beta,
            "gamma": gamma,
            "convexity": c,
            "b_used": b,
            "m_estimate": constants.third_moment.value,
            "points_checked": checked,
            "warn_points": warn_points,
            "fail_points": fail_points,
            "gap_fit": fit_json,
        }),
        tables: vec![(String::new(), csv)],
    })
}

fn check_as_convergence(vc: &VerifyConfig, ensemble: &[RunRecord]) -> Result<CheckResult> {
    let epsilon = vc.epsilon.unwrap_or(1e-3);
    let report = as_convergence_check(ensemble, epsilon).map_err(|e| anyhow!(e.to_string()))?;
    let status = if report.all_monotone && report.pass_fraction == 1.0 {
        Status::Pass
    } else {
        Status::Fail
    };
    let mut csv = String::from("seed,zeta_final,monotone\n");
    for s in &report.per_seed {
        csv.push_str(&format!(
            "{},{},{}\n",
            s.seed,
            format_float(s.zeta_final),
            s.monotone
        ));
    }
    Ok(CheckResult {
        status,
        details: json!({
            "epsilon": epsilon,
            "pass_fraction": report.pass_fraction,
            "all_monotone": report.all_monotone,
            "per_seed": report
                .per_seed
                .iter()
                .map(|s| json!({ "seed": s.seed, "zeta_final": s.zeta_final }))
                .collect::<Vec<_>>(),
        }),
        tables: vec![(String::new(), csv)],
    })
}

fn check_moments(ensemble: &[RunRecord]) -> Result<CheckResult> {
    let curves = moment_track(ensemble).map_err(|e| anyhow!(e.to_string()))?;
    let status = if curves.holder_consistent {
        Status::Pass
    } else {
        Status::Fail
    };
    let mut csv = String::from("k,mean_dist,mean_dist_sq,mean_dist_cubed\n");
    for (i, &k) in curves.ks.iter().enumerate() {
        csv.push_str(&format!(
            "{k},{},{},{}\n",
            format_float(curves.mean_dist[i]),
            format_float(curves.mean_dist_sq[i]),
            format_float(curves.mean_dist_cubed[i])
        ));
    }
    Ok(CheckResult {
        status,
        details: json!({
            "empirical_third_moment": curves.empirical_third_moment,
            "m_estimate": softclip_core::diagnostics::THIRD_MOMENT_SAFETY
                * curves.empirical_third_moment,
            "holder_consistent": curves.holder_consistent,
            "first_third_moment": curves.mean_dist_cubed.first(),
            "last_third_moment": curves.mean_dist_cubed.last(),
        }),
        tables: vec![(String::new(), csv)],
    })
}

fn check_gd_bounds(exp: &Experiment, vc: &VerifyConfig) -> Result<CheckResult> {
    let problem = exp.problem.as_ref();
    let lipschitz = problem
        .constants()
        .lipschitz
        .ok_or(softclip_core::Error::MissingConstant("lipschitz"))
        .map_err(|e| anyhow!(e.to_string()))?;
    let alpha = vc.gd_alpha.unwrap_or_else(|| (0.9 / lipschitz).min(0.05));
    let iters = vc.gd_iters.unwrap_or(200);
    let schedule = StepSchedule::Constant { beta: alpha };
    let report = gd_bound_comparison(problem, &schedule, iters, &exp.w1, None)
        .map_err(|e| anyhow!(e.to_string()))?;
    let status = if report.all_valid {
        Status::Pass
    } else {
        Status::Fail
    };
    let tightest = report
        .strategies
        .iter()
        .filter(|s| s.hypothesis_holds)
        .min_by(|a, b| a.bound.total_cmp(&b.bound))
        .map(|s| s.name);
    let mut csv = String::from("strategy,hypothesis_holds,bound,tightness\n");
    for s in &report.strategies {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            s.name,
            s.hypothesis_holds,
            format_float(s.bound),
            if s.tightness.is_finite() {
                format_float(s.tightness)
            } else {
                "inf".to_string()
            }
        ));
    }
    Ok(CheckResult {
        status,
        details: json!({
            "alpha": alpha,
            "iters": iters,
            "empirical_sum": report.empirical_sum,
            "grad_sup": report.grad_sup,
            "third_moment": report.third_moment,
            "tightest_strategy": tightest,
            "strategies": report
                .strategies
                .iter()
                .map(|s| json!({
                    "name": s.name,
                    "hypothesis_holds": s.hypothesis_holds,
                    "bound": s.bound,
                    "tightness": if s.tightness.is_finite() { json!(s.tightness) } else { json!("inf") },
                }))
                .collect::<Vec<_>>(),
        }),
        tables: vec![(String::new(), csv)],
    })
}
