//! Executable oracles for per-step descent, convergence-rate bounds,
//! almost-sure convergence and moment tracking.

mod bounds;
mod descent;
mod gd;
mod moments;
mod rates;

pub use bounds::{
    bound_constants, bound_constants_with, inv_linear_min_grad_bound,
    inv_linear_min_grad_bound_tight, min_grad_sq_bound, strongly_convex_gap_bound, BoundConstants,
    Provenance, Tagged,
};
pub use descent::{verify_descent, DescentReport};
pub use gd::{gd_bound_comparison, GdBoundReport, GdStrategyBound};
pub use moments::{estimate_third_moment, moment_track, MomentCurves, THIRD_MOMENT_SAFETY};
pub use rates::{
    as_convergence_check, fit_power_law, fit_rate, min_grad_trace, AsConvergenceReport, FitOptions,
    RateFit, RateMetric, RateModel, SeedConvergence,
};
