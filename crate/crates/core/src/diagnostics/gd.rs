//! Comparison of three bounding strategies for deterministic gradient
//! descent on the same trajectory.
//!
//! All three bound the weighted gradient sum `Σ_k α_k‖∇F(w_k)‖²` but trade
//! hypotheses differently: a step-size restriction `α_k < 1/L`, a uniform
//! gradient bound `‖∇F‖ ≤ A`, or a moment bound on `‖w_k − w*‖³` along the
//! trajectory.

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::schedule::StepSchedule;

#[derive(Debug, Clone, PartialEq)]
pub struct GdStrategyBound {
    pub name: &'static str,
    /// Whether this strategy's hypothesis held on the trajectory.
    pub hypothesis_holds: bool,
    pub bound: f64,
    /// `bound / empirical sum`; infinite when the empirical sum is zero.
    pub tightness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdBoundReport {
    /// `Σ_k α_k‖∇F(w_k)‖²` along the actual descent trajectory.
    pub empirical_sum: f64,
    pub strategies: Vec<GdStrategyBound>,
    /// The gradient-norm supremum used by the uniform-bound strategy.
    pub grad_sup: f64,
    /// `max_k ‖w_k − w*‖³` along the trajectory.
    pub third_moment: f64,
    /// True when every strategy whose hypothesis holds dominates the
    /// empirical sum.
    pub all_valid: bool,
}

/// Run deterministic gradient descent for `k_max` steps and compare the
/// weighted gradient sum against the three strategy bounds.
///
/// `a_sup`, when given, is used as the uniform gradient bound; otherwise the
/// trajectory maximum serves as the (empirically valid) stand-in.
pub fn gd_bound_comparison(
    problem: &dyn Problem,
    schedule: &StepSchedule,
    k_max: u64,
    w1: &[f64],
    a_sup: Option<f64>,
) -> Result<GdBoundReport> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    if w1.len() != problem.dim() {
        return Err(Error::InvalidArgument("w1 dimension mismatch".into()));
    }
    let consts = problem.constants();
    let lipschitz = consts
        .lipschitz
        .ok_or(Error::MissingConstant("lipschitz"))?;
    let f_star = consts.f_star.ok_or(Error::MissingConstant("f_star"))?;
    let minimizer = consts
        .minimizer
        .as_ref()
        .ok_or(Error::MissingConstant("minimizer"))?;

    let mut w = w1.to_vec();
    let mut empirical_sum = 0.0;
    let mut grad_sup: f64 = 0.0;
    let mut dist_cubed_max: f64 = 0.0;
    let mut alpha_max: f64 = 0.0;
    for k in 1..=k_max {
        let alpha = schedule.alpha_at(k);
        alpha_max = alpha_max.max(alpha);
        let grad = problem.full_grad(&w);
        let gsq: f64 = grad.iter().map(|g| g * g).sum();
        empirical_sum += alpha * gsq;
        grad_sup = grad_sup.max(gsq.sqrt());
        let dist: f64 = w
            .iter()
            .zip(minimizer)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        dist_cubed_max = dist_cubed_max.max(dist.powi(3));
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= alpha * gi;
        }
    }

    let delta_f = problem.value(w1) - f_star;
    let sum_sq = schedule.partial_sum_sq(k_max);
    let a = a_sup.unwrap_or(grad_sup);

    let strategies = vec![
        GdStrategyBound {
            name: "step-restriction",
            hypothesis_holds: alpha_max < 1.0 / lipschitz,
            bound: 2.0 * delta_f,
            tightness: ratio(2.0 * delta_f, empirical_sum),
        },
        GdStrategyBound {
            name: "uniform-gradient-bound",
            hypothesis_holds: grad_sup <= a,
            bound: delta_f + lipschitz * a * a / 2.0 * sum_sq,
            tightness: ratio(delta_f + lipschitz * a * a / 2.0 * sum_sq, empirical_sum),
        },
        GdStrategyBound {
            name: "moment",
            hypothesis_holds: true,
            bound: delta_f + lipschitz.powi(3) * dist_cubed_max.powf(2.0 / 3.0) / 2.0 * sum_sq,
            tightness: ratio(
                delta_f + lipschitz.powi(3) * dist_cubed_max.powf(2.0 / 3.0) / 2.0 * sum_sq,
                empirical_sum,
            ),
        },
    ];

    let all_valid = strategies
        .iter()
        .filter(|s| s.hypothesis_holds)
        .all(|s| s.bound >= empirical_sum);

    Ok(GdBoundReport {
        empirical_sum,
        strategies,
        grad_sup,
        third_moment: dist_cubed_max,
        all_valid,
    })
}

fn ratio(bound: f64, empirical: f64) -> f64 {
    if empirical > 0.0 {
        bound / empirical
    } else {
        f64::INFINITY
    }
}
