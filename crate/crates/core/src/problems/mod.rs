//! Stochastic test objectives with seeded gradient samplers.
//!
//! Every problem exposes the deterministic objective `F`, its full gradient,
//! and a stochastic gradient draw `∇f(w, ξ)` driven by a caller-owned RNG.
//! Where a constant is known analytically (Lipschitz constant, noise level at
//! the minimizer, strong convexity, minimizer, optimal value) it is carried in
//! [`Constants`] so the diagnostics can evaluate bounds without guessing.

mod logreg;
mod nonconvex;
mod quadratic;

pub use logreg::{logistic_regression, LogisticRegression};
pub use nonconvex::{nonconvex_smooth, NonconvexSmooth, DEFAULT_COSINE_AMPLITUDE};
pub use quadratic::{
    minibatch_quadratic, stiff_diag_quadratic, strongly_convex_quadratic, MinibatchQuadratic,
    ShiftedDiagQuadratic,
};

use rand::RngCore;

/// Analytically known problem constants. Absent fields are simply unknown.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constants {
    /// Lipschitz constant of the full gradient.
    pub lipschitz: Option<f64>,
    /// Strong-convexity constant, when the objective is strongly convex.
    pub strong_convexity: Option<f64>,
    /// Bound on `E‖∇f(w*, ξ)‖²`.
    pub sigma_sq: Option<f64>,
    /// False when `sigma_sq` is a Monte-Carlo estimate rather than analytic.
    pub sigma_sq_exact: bool,
    /// Standard error of the `sigma_sq` estimate, when estimated.
    pub sigma_sq_stderr: Option<f64>,
    /// A global minimizer.
    pub minimizer: Option<Vec<f64>>,
    /// The minimal objective value.
    pub f_star: Option<f64>,
    /// Bound on `E‖w_k − w*‖³` along the iteration, when known a priori.
    pub third_moment: Option<f64>,
}

/// A stochastic objective. Implementations are immutable after construction;
/// gradient draws mutate only the caller's RNG, so concurrent runs with
/// separate RNGs never share state.
pub trait Problem: Send + Sync + std::fmt::Debug {
    /// Catalogue name, also used in run metadata and configuration files.
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// The deterministic full objective `F(w)`.
    fn value(&self, w: &[f64]) -> f64;

    /// The full gradient `∇F(w)`.
    fn full_grad(&self, w: &[f64]) -> Vec<f64>;

    /// One stochastic gradient draw `∇f(w, ξ)`.
    fn stoch_grad(&self, w: &[f64], rng: &mut dyn RngCore) -> Vec<f64>;

    fn constants(&self) -> &Constants;

    /// Whether every stochastic gradient vanishes at the minimizer.
    fn interpolating(&self) -> bool;
}

/// `F(w) = w⁴/4` on the real line. The gradient `w³` is not globally
/// Lipschitz, which is what makes plain SGD with `α_k = α₀/k` blow up from
/// initial values `w₁ ≥ √(3/α₀)`.
#[derive(Debug, Clone)]
pub struct Quartic {
    constants: Constants,
}

/// Deterministic scalar quartic; the stochastic gradient equals the full one.
pub fn quartic() -> Quartic {
    Quartic {
        constants: Constants {
            minimizer: Some(vec![0.0]),
            f_star: Some(0.0),
            sigma_sq: Some(0.0),
            sigma_sq_exact: true,
            ..Constants::default()
        },
    }
}

impl Problem for Quartic {
    fn name(&self) -> &str {
        "quartic"
    }

    fn dim(&self) -> usize {
        1
    }

    fn value(&self, w: &[f64]) -> f64 {
        w[0].powi(4) / 4.0
    }

    fn full_grad(&self, w: &[f64]) -> Vec<f64> {
        vec![w[0].powi(3)]
    }

    fn stoch_grad(&self, w: &[f64], _rng: &mut dyn RngCore) -> Vec<f64> {
        self.full_grad(w)
    }

    fn constants(&self) -> &Constants {
        &self.constants
    }

    fn interpolating(&self) -> bool {
        true
    }
}

/// Add `noise · z` with `z ~ N(0, I)` to a gradient in place.
pub(crate) fn add_gaussian_noise(grad: &mut [f64], noise: f64, rng: &mut dyn RngCore) {
    if noise == 0.0 {
        return;
    }
    use rand::Rng;
    for g in grad.iter_mut() {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        *g += noise * z;
    }
}
