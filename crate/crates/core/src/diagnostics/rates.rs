//! Running-minimum traces, rate fitting and the per-seed convergence check.

use crate::error::{Error, Result};
use crate::record::RunRecord;

/// Running minimum of `‖∇F(w_k)‖²` over the recorded iterations.
/// Nonincreasing by construction.
pub fn min_grad_trace(record: &RunRecord) -> Vec<(u64, f64)> {
    let mut best = f64::INFINITY;
    record
        .trace
        .iter()
        .map(|p| {
            best = best.min(p.grad_norm_sq);
            (p.k, best)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMetric {
    /// Running minimum of the squared full-gradient norm.
    MinGradSq,
    /// `F(w_k) − F*`; needs the optimal value.
    FGap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `metric(k) ≈ C / k^p`
    Power,
    /// `metric(k) ≈ C / ln k`
    Log,
}

/// Options for [`fit_rate`]. Without an explicit range the first 10% of the
/// iterations are excluded as burn-in.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub metric: RateMetric,
    pub model: RateModel,
    pub k_min: Option<u64>,
    pub k_max: Option<u64>,
    /// Required by the `FGap` metric.
    pub f_star: Option<f64>,
}

/// A least-squares fit in log space.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub model: RateModel,
    pub coefficient: f64,
    /// The decay exponent for the power model; absent for the log model.
    pub exponent: Option<f64>,
    /// RMS of the log-space deviations over the fitted range.
    pub residual: f64,
    pub k_range: (u64, u64),
    pub n_points: usize,
}

/// Average the chosen metric across an ensemble pointwise and fit the decay
/// model on the stated k-range in log space.
pub fn fit_rate(ensemble: &[RunRecord], opts: &FitOptions) -> Result<RateFit> {
    if ensemble.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "rate fitting needs at least 3 records, got {}",
            ensemble.len()
        )));
    }
    let ks = aligned_ks(ensemble)?;
    let series: Vec<Vec<f64>> = ensemble
        .iter()
        .map(|rec| metric_series(rec, opts))
        .collect::<Result<_>>()?;

    let iters = ensemble[0].meta.iters;
    let k_min = opts.k_min.unwrap_or(iters / 10 + 1);
    let k_max = opts.k_max.unwrap_or(iters);

    let mut points = Vec::new();
    for (idx, &k) in ks.iter().enumerate() {
        if k < k_min || k > k_max {
            continue;
        }
        let mean = series.iter().map(|s| s[idx]).sum::<f64>() / series.len() as f64;
        points.push((k as f64, mean));
    }
    if points.len() < 2 {
        return Err(Error::FitDomain(format!(
            "only {} recorded points in k-range [{k_min}, {k_max}]",
            points.len()
        )));
    }
    if let Some((k, m)) = points.iter().find(|(_, m)| *m <= 0.0) {
        return Err(Error::FitDomain(format!(
            "averaged metric is non-positive ({m}) at k = {k}; cannot fit in log space"
        )));
    }

    match opts.model {
        RateModel::Power => {
            let (coefficient, exponent, residual) = fit_power_law(&points)?;
            Ok(RateFit {
                model: RateModel::Power,
                coefficient,
                exponent: Some(exponent),
                residual,
                k_range: (k_min, k_max),
                n_points: points.len(),
            })
        }
        RateModel::Log => {
            if points.iter().any(|(k, _)| *k < 2.0) {
                return Err(Error::FitDomain(
                    "log model needs k ≥ 2 so that ln k is positive".into(),
                ));
            }
            // ln m + ln ln k = ln C
            let logs: Vec<f64> = points.iter().map(|(k, m)| m.ln() + k.ln().ln()).collect();
            let log_c = logs.iter().sum::<f64>() / logs.len() as f64;
            let residual = (logs.iter().map(|v| (v - log_c) * (v - log_c)).sum::<f64>()
                / logs.len() as f64)
                .sqrt();
            Ok(RateFit {
                model: RateModel::Log,
                coefficient: log_c.exp(),
                exponent: None,
                residual,
                k_range: (k_min, k_max),
                n_points: points.len(),
            })
        }
    }
}

/// Least squares of `ln y` against `ln x`: returns `(C, p, rms_residual)` for
/// the model `y = C·x^{−p}`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::FitDomain(
            "power-law fit needs at least 2 points".into(),
        ));
    }
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::FitDomain(
            "power-law fit needs positive coordinates".into(),
        ));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::FitDomain(
            "power-law fit needs at least two distinct k".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((intercept.exp(), -slope, residual))
}

fn metric_series(rec: &RunRecord, opts: &FitOptions) -> Result<Vec<f64>> {
    match opts.metric {
        RateMetric::MinGradSq => Ok(min_grad_trace(rec).into_iter().map(|(_, v)| v).collect()),
        RateMetric::FGap => {
            let f_star = opts.f_star.ok_or(Error::MissingConstant("f_star"))?;
            Ok(rec.trace.iter().map(|p| p.f_value - f_star).collect())
        }
    }
}

fn aligned_ks(ensemble: &[RunRecord]) -> Result<Vec<u64>> {
    let ks: Vec<u64> = ensemble[0].trace.iter().map(|p| p.k).collect();
    for rec in &ensemble[1..] {
        let other: Vec<u64> = rec.trace.iter().map(|p| p.k).collect();
        if other != ks {
            return Err(Error::InvalidArgument(
                "ensemble records have mismatching recording grids".into(),
            ));
        }
    }
    Ok(ks)
}

/// Per-seed convergence of the running minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedConvergence {
    pub seed: u64,
    pub zeta_final: f64,
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsConvergenceReport {
    pub per_seed: Vec<SeedConvergence>,
    /// Fraction of seeds whose final running minimum is at most ε.
    pub pass_fraction: f64,
    pub all_monotone: bool,
    pub epsilon: f64,
}

/// For every seed, check that the running minimum is nonincreasing (a
/// structural property; a violation would be an implementation bug) and
/// report the fraction of seeds with `ζ_final ≤ ε`.
pub fn as_convergence_check(ensemble: &[RunRecord], epsilon: f64) -> Result<AsConvergenceReport> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    let head = &ensemble[0].meta;
    let mut seeds = std::collections::HashSet::new();
    for rec in ensemble {
        if rec.meta.method != head.method
            || rec.meta.problem != head.problem
            || rec.meta.schedule != head.schedule
        {
            return Err(Error::InvalidArgument(
                "ensemble mixes methods, problems or schedules".into(),
            ));
        }
        if !seeds.insert(rec.meta.seed) {
            return Err(Error::InvalidArgument(format!(
                "duplicate seed {} in ensemble",
                rec.meta.seed
            )));
        }
    }

    let per_seed: Vec<SeedConvergence> = ensemble
        .iter()
        .map(|rec| {
            let zeta = min_grad_trace(rec);
            let monotone = zeta.windows(2).all(|w| w[1].1 <= w[0].1);
            SeedConvergence {
                seed: rec.meta.seed,
                zeta_final: zeta.last().map(|&(_, v)| v).unwrap_or(f64::INFINITY),
                monotone,
            }
        })
        .collect();
    let n_pass = per_seed.iter().filter(|s| s.zeta_final <= epsilon).count();
    Ok(AsConvergenceReport {
        pass_fraction: n_pass as f64 / per_seed.len() as f64,
        all_monotone: per_seed.iter().all(|s| s.monotone),
        per_seed,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::{RunMeta, TracePoint};

    fn record_with(grad_sq: &[f64], seed: u64) -> RunRecord {
        RunRecord {
            meta: RunMeta {
                method: "sgd".into(),
                schedule: "constant(beta=0.1)".into(),
                problem: "synthetic".into(),
                seed,
                iters: grad_sq.len() as u64,
                diverged_at: None,
            },
            trace: grad_sq
                .iter()
                .enumerate()
                .map(|(i, &g)| TracePoint {
                    k: i as u64 + 1,
                    alpha: 0.1,
                    f_value: g,
                    grad_norm_sq: g,
                    dist_to_opt: None,
                })
                .collect(),
            final_w: vec![0.0],
        }
    }

    #[test]
    fn running_min_examples() {
        let rec = record_with(&[4.0, 1.0, 3.0], 0);
        let zeta: Vec<f64> = min_grad_trace(&rec).into_iter().map(|(_, v)| v).collect();
        assert_eq!(zeta, vec![4.0, 1.0, 1.0]);

        let rec = record_with(&[2.0, 2.0, 2.0], 0);
        let zeta: Vec<f64> = min_grad_trace(&rec).into_iter().map(|(_, v)| v).collect();
        assert_eq!(zeta, vec![2.0, 2.0, 2.0]);
    }

    fn synthetic_ensemble(f: impl Fn(f64) -> f64) -> Vec<RunRecord> {
        (0..3)
            .map(|seed| {
                let vals: Vec<f64> = (1..=2000).map(|k| f(k as f64)).collect();
                record_with(&vals, seed)
            })
            .collect()
    }

    #[test]
    fn power_model_recovers_synthetic_curve() {
        // metric = 3/k is decreasing, so it equals its own running min.
        let ensemble = synthetic_ensemble(|k| 3.0 / k);
        let fit = fit_rate(
            &ensemble,
            &FitOptions {
                metric: RateMetric::MinGradSq,
                model: RateModel::Power,
                k_min: None,
                k_max: None,
                f_star: None,
            },
        )
        .unwrap();
        assert!((fit.exponent.unwrap() - 1.0).abs() < 1e-6);
        assert!((fit.coefficient - 3.0).abs() < 1e-6);
        assert!(fit.residual < 1e-9);
        // Default burn-in drops the first 10% of iterations.
        assert_eq!(fit.k_range.0, 201);
    }

    #[test]
    fn log_model_recovers_synthetic_curve() {
        let ensemble = synthetic_ensemble(|k| 5.0 / k.ln());
        let fit = fit_rate(
            &ensemble,
            &FitOptions {
                metric: RateMetric::MinGradSq,
                model: RateModel::Log,
                k_min: Some(2),
                k_max: None,
                f_star: None,
            },
        )
        .unwrap();
        assert!((fit.coefficient - 5.0).abs() < 1e-6);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_domain_errors() {
        let ensemble = synthetic_ensemble(|_| 0.0);
        let err = fit_rate(
            &ensemble,
            &FitOptions {
                metric: RateMetric::MinGradSq,
                model: RateModel::Power,
                k_min: None,
                k_max: None,
                f_star: None,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::FitDomain(_)));

        let ensemble = synthetic_ensemble(|k| 1.0 / k);
        let err = fit_rate(
            &ensemble,
            &FitOptions {
                metric: RateMetric::FGap,
                model: RateModel::Power,
                k_min: None,
                k_max: None,
                f_star: None,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingConstant("f_star")));
    }

    #[test]
    fn convergence_check_counts_passing_seeds() {
        let mut ensemble = synthetic_ensemble(|k| 1.0 / k);
        let report = as_convergence_check(&ensemble, 1e-3).unwrap();
        assert_eq!(report.pass_fraction, 1.0);
        assert!(report.all_monotone);

        // One seed stuck above the threshold.
        ensemble.push(record_with(&vec![0.5; 2000], 10));
        let report = as_convergence_check(&ensemble, 1e-3).unwrap();
        assert!((report.pass_fraction - 0.75).abs() < 1e-12);

        // Duplicate seeds are rejected.
        ensemble.push(record_with(&[1.0], 10));
        assert!(as_convergence_check(&ensemble, 1e-3).is_err());
    }
}
