//! A smooth, genuinely non-convex separable objective.

use rand::RngCore;

use super::{add_gaussian_noise, Constants, Problem};

/// Default cosine amplitude. Values above 2 make the Hessian indefinite
/// near the origin, so the objective is actually non-convex.
pub const DEFAULT_COSINE_AMPLITUDE: f64 = 2.5;

/// `F(w) = Σ_j (w_j² + a·cos(w_j) − a)` with additive Gaussian gradient
/// noise.
///
/// For `a > 2` the origin is a local maximum (`F''(0) = 2 − a < 0`) and the
/// per-coordinate global minimizer sits at the positive root `x₀` of
/// `2x = a·sin(x)`; the canonical minimizer is `(x₀, …, x₀)`. The gradient is
/// Lipschitz with `L = 2 + a` since `|F''(x)| = |2 − a·cos(x)| ≤ 2 + a`.
#[derive(Debug, Clone)]
pub struct NonconvexSmooth {
    dim: usize,
    amplitude: f64,
    noise: f64,
    constants: Constants,
}

/// Build the objective with the default amplitude 2.5.
pub fn nonconvex_smooth(d: usize, noise: f64) -> NonconvexSmooth {
    NonconvexSmooth::with_amplitude(d, DEFAULT_COSINE_AMPLITUDE, noise)
}

impl NonconvexSmooth {
    pub fn with_amplitude(d: usize, amplitude: f64, noise: f64) -> NonconvexSmooth {
        assert!(d >= 1 && noise >= 0.0);
        assert!(amplitude > 0.0 && amplitude.is_finite());
        let x0 = coordinate_minimizer(amplitude);
        let f1_min = scalar_value(x0, amplitude);
        // The coordinate objective is even, so scanning a 1-d grid certifies
        // the global minimum for the whole separable sum.
        let grid_min = (0..200_001)
            .map(|i| scalar_value(-10.0 + i as f64 * 1e-4, amplitude))
            .fold(f64::MAX, f64::min);
        assert!(
            f1_min <= grid_min + 1e-9,
            "computed minimizer {x0} (value {f1_min}) beaten by grid value {grid_min}"
        );
        let constants = Constants {
            lipschitz: Some(2.0 + amplitude),
            sigma_sq: Some(noise * noise * d as f64),
            sigma_sq_exact: true,
            minimizer: Some(vec![x0; d]),
            f_star: Some(d as f64 * f1_min),
            ..Constants::default()
        };
        NonconvexSmooth {
            dim: d,
            amplitude,
            noise,
            constants,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Second derivative of the coordinate objective; changes sign for
    /// amplitudes above 2.
    pub fn coordinate_curvature(&self, x: f64) -> f64 {
        2.0 - self.amplitude * x.cos()
    }
}

fn scalar_value(x: f64, a: f64) -> f64 {
    x * x + a * (x.cos() - 1.0)
}

/// Positive root of `2x = a·sin(x)` in `(0, π)`, or 0 when the objective is
/// convex (`a ≤ 2`). Bisection on the stationarity equation; 200 halvings
/// take it to machine precision.
fn coordinate_minimizer(a: f64) -> f64 {
    if a <= 2.0 {
        return 0.0;
    }
    let phi = |x: f64| 2.0 * x - a * x.sin();
    let (mut lo, mut hi) = (1e-12, std::f64::consts::PI);
    debug_assert!(phi(lo) < 0.0 && phi(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl Problem for NonconvexSmooth {
    fn name(&self) -> &str {
        "nonconvex"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, w: &[f64]) -> f64 {
        w.iter().map(|&x| scalar_value(x, self.amplitude)).sum()
    }

    fn full_grad(&self, w: &[f64]) -> Vec<f64> {
        w.iter()
            .map(|&x| 2.0 * x - self.amplitude * x.sin())
            .collect()
    }

    fn stoch_grad(&self, w: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let mut g = self.full_grad(w);
        add_gaussian_noise(&mut g, self.noise, rng);
        g
    }

    fn constants(&self) -> &Constants {
        &self.constants
    }

    fn interpolating(&self) -> bool {
        self.noise == 0.0
    }
}
