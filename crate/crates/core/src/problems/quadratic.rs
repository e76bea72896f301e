//! Quadratic objectives: prescribed-spectrum diagonal quadratics and the
//! finite-sum minibatch quadratic with empirically sampled coefficients.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{add_gaussian_noise, Constants, Problem};

/// `F(w) = ½ Σ λ_j (w_j − s_j)²` with additive Gaussian gradient noise.
///
/// The eigenvalues are fixed at construction, so the conditioning is exactly
/// what it claims to be. With `noise = 0` the stochastic gradient vanishes at
/// the minimizer and the problem interpolates.
#[derive(Debug, Clone)]
pub struct ShiftedDiagQuadratic {
    name: &'static str,
    lambdas: Vec<f64>,
    shift: Vec<f64>,
    noise: f64,
    constants: Constants,
}

/// Diagonal quadratic with log-uniformly spaced eigenvalues in
/// `[lambda_min, lambda_max]`, minimizer at the origin. A surrogate for stiff
/// problems with a known, heavily spread spectrum. With `d = 1` the single
/// eigenvalue is `lambda_max`.
pub fn stiff_diag_quadratic(
    lambda_min: f64,
    lambda_max: f64,
    d: usize,
    noise: f64,
) -> ShiftedDiagQuadratic {
    assert!(
        lambda_min > 0.0 && lambda_min <= lambda_max,
        "need 0 < lambda_min <= lambda_max"
    );
    assert!(d >= 1 && noise >= 0.0);
    let lambdas: Vec<f64> = if d == 1 {
        vec![lambda_max]
    } else {
        let (lo, hi) = (lambda_min.ln(), lambda_max.ln());
        (0..d)
            .map(|j| {
                if j == 0 {
                    lambda_min
                } else if j == d - 1 {
                    lambda_max
                } else {
                    (lo + (hi - lo) * j as f64 / (d - 1) as f64).exp()
                }
            })
            .collect()
    };
    build_diag("stiff_diag", lambdas, vec![0.0; d], noise)
}

/// Diagonal quadratic with eigenvalues linearly spaced in `[c, L]` and the
/// minimizer shifted to the all-ones vector, so distances to the optimum are
/// nontrivial. Strongly convex with constant `c`.
pub fn strongly_convex_quadratic(c: f64, l: f64, d: usize, noise: f64) -> ShiftedDiagQuadratic {
    assert!(c > 0.0 && c <= l, "need 0 < c <= L");
    assert!(d >= 1 && noise >= 0.0);
    let lambdas: Vec<f64> = if d == 1 {
        vec![l]
    } else {
        (0..d)
            .map(|j| c + (l - c) * j as f64 / (d - 1) as f64)
            .collect()
    };
    build_diag("sc_quadratic", lambdas, vec![1.0; d], noise)
}

fn build_diag(
    name: &'static str,
    lambdas: Vec<f64>,
    shift: Vec<f64>,
    noise: f64,
) -> ShiftedDiagQuadratic {
    let d = lambdas.len();
    let l_max = lambdas.iter().cloned().fold(f64::MIN, f64::max);
    let l_min = lambdas.iter().cloned().fold(f64::MAX, f64::min);
    let constants = Constants {
        lipschitz: Some(l_max),
        strong_convexity: Some(l_min),
        sigma_sq: Some(noise * noise * d as f64),
        sigma_sq_exact: true,
        minimizer: Some(shift.clone()),
        f_star: Some(0.0),
        ..Constants::default()
    };
    ShiftedDiagQuadratic {
        name,
        lambdas,
        shift,
        noise,
        constants,
    }
}

impl ShiftedDiagQuadratic {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambdas
    }
}

impl Problem for ShiftedDiagQuadratic {
    fn name(&self) -> &str {
        self.name
    }

    fn dim(&self) -> usize {
        self.lambdas.len()
    }

    fn value(&self, w: &[f64]) -> f64 {
        0.5 * self
            .lambdas
            .iter()
            .zip(w)
            .zip(&self.shift)
            .map(|((&l, &wj), &sj)| l * (wj - sj) * (wj - sj))
            .sum::<f64>()
    }

    fn full_grad(&self, w: &[f64]) -> Vec<f64> {
        self.lambdas
            .iter()
            .zip(w)
            .zip(&self.shift)
            .map(|((&l, &wj), &sj)| l * (wj - sj))
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

/// Number of data vectors in the minibatch quadratic.
pub const MINIBATCH_N: usize = 1000;
/// Dimension of the minibatch quadratic.
pub const MINIBATCH_DIM: usize = 50;
/// Batch size for its stochastic gradient.
pub const MINIBATCH_BATCH: usize = 32;
/// Number of seeded batches used for the σ² plug-in estimate.
const SIGMA_SQ_BATCHES: usize = 100_000;

/// A finite-sum quadratic built from `N = 1000` sampled feature vectors in
/// dimension 50.
///
/// Feature `x^i_j` is drawn from a normal distribution with standard
/// deviation 1 and mean `1 + 10i/d` (`i` the 1-based sample index). The full
/// objective is
///
/// ```text
/// F(w) = ½ wᵀA w + bᵀw + 13,
/// λ_j = A_jj = 2/(Nd) Σ_i (x^i_j)²,   b_j = 2·13/(Nd) Σ_i x^i_j,
/// ```
///
/// so `∇F(w) = Aw + b` and the stochastic gradient averages the per-sample
/// gradients over a uniformly drawn batch of 32 indices without replacement,
/// which is an exactly unbiased estimate by linearity.
#[derive(Debug, Clone)]
pub struct MinibatchQuadratic {
    x: Vec<Vec<f64>>,
    x_sq: Vec<Vec<f64>>,
    lambdas: Vec<f64>,
    b: Vec<f64>,
    constants: Constants,
}

/// Build the minibatch quadratic from its data-generation seed. The σ² bound
/// is a plug-in estimate over 100 000 seeded batches at the minimizer and is
/// flagged as estimated, with its standard error recorded.
pub fn minibatch_quadratic(seed: u64) -> MinibatchQuadratic {
    let n = MINIBATCH_N;
    let d = MINIBATCH_DIM;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![vec![0.0; d]; n];
    for (i, row) in x.iter_mut().enumerate() {
        let mean = 1.0 + 10.0 * (i + 1) as f64 / d as f64;
        for v in row.iter_mut() {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            *v = mean + z;
        }
    }
    let x_sq: Vec<Vec<f64>> = x
        .iter()
        .map(|row| row.iter().map(|v| v * v).collect())
        .collect();

    let nd = (n * d) as f64;
    let mut lambdas = vec![0.0; d];
    let mut b = vec![0.0; d];
    for i in 0..n {
        for j in 0..d {
            lambdas[j] += 2.0 / nd * x_sq[i][j];
            b[j] += 2.0 * 13.0 / nd * x[i][j];
        }
    }

    let minimizer: Vec<f64> = lambdas.iter().zip(&b).map(|(&l, &bj)| -bj / l).collect();
    let l_max = lambdas.iter().cloned().fold(f64::MIN, f64::max);
    let l_min = lambdas.iter().cloned().fold(f64::MAX, f64::min);

    let mut problem = MinibatchQuadratic {
        x,
        x_sq,
        lambdas,
        b,
        constants: Constants::default(),
    };
    let f_star = problem.value(&minimizer);

    // Plug-in σ² at the minimizer over seeded batches, with standard error.
    let mut est_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5163_3a2e_u64);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..SIGMA_SQ_BATCHES {
        let g = problem.stoch_grad(&minimizer, &mut est_rng);
        let nsq: f64 = g.iter().map(|v| v * v).sum();
        sum += nsq;
        sum_sq += nsq * nsq;
    }
    let m = SIGMA_SQ_BATCHES as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0);
    let stderr = (var / m).sqrt();

    problem.constants = Constants {
        lipschitz: Some(l_max),
        strong_convexity: Some(l_min),
        sigma_sq: Some(mean),
        sigma_sq_exact: false,
        sigma_sq_stderr: Some(stderr),
        minimizer: Some(minimizer),
        f_star: Some(f_star),
        ..Constants::default()
    };
    problem
}

impl MinibatchQuadratic {
    pub fn n_samples(&self) -> usize {
        MINIBATCH_N
    }

    /// The measured diagonal spectrum (reported, not prescribed).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambdas
    }

    /// Gradient of the single-sample objective `f(x^i, ·)`.
    pub fn sample_grad(&self, i: usize, w: &[f64]) -> Vec<f64> {
        let d = self.lambdas.len() as f64;
        (0..self.lambdas.len())
            .map(|j| 2.0 / d * (self.x_sq[i][j] * w[j] + 13.0 * self.x[i][j]))
            .collect()
    }
}

impl Problem for MinibatchQuadratic {
    fn name(&self) -> &str {
        "appendix_e"
    }

    fn dim(&self) -> usize {
        MINIBATCH_DIM
    }

    fn value(&self, w: &[f64]) -> f64 {
        let quad: f64 = self
            .lambdas
            .iter()
            .zip(w)
            .map(|(&l, &wj)| 0.5 * l * wj * wj)
            .sum();
        let lin: f64 = self.b.iter().zip(w).map(|(&bj, &wj)| bj * wj).sum();
        quad + lin + 13.0
    }

    fn full_grad(&self, w: &[f64]) -> Vec<f64> {
        self.lambdas
            .iter()
            .zip(&self.b)
            .zip(w)
            .map(|((&l, &bj), &wj)| l * wj + bj)
            .collect()
    }

    fn stoch_grad(&self, w: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let batch = rand::seq::index::sample(rng, MINIBATCH_N, MINIBATCH_BATCH);
        let d = self.lambdas.len();
        let scale = 2.0 / (MINIBATCH_BATCH as f64 * d as f64);
        let mut g = vec![0.0; d];
        for i in batch.iter() {
            let (xi, xi_sq) = (&self.x[i], &self.x_sq[i]);
            for j in 0..d {
                g[j] += xi_sq[j] * w[j] + 13.0 * xi[j];
            }
        }
        for v in g.iter_mut() {
            *v *= scale;
        }
        g
    }

    fn constants(&self) -> &Constants {
        &self.constants
    }

    fn interpolating(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stiff_diag_spectrum_endpoints() {
        let p = stiff_diag_quadratic(7.9e-2, 3.8e4, 50, 0.0);
        let ev = p.eigenvalues();
        assert_eq!(ev[0], 7.9e-2);
        assert_eq!(ev[49], 3.8e4);
        assert!((ev[49] / ev[0] - 4.81e5).abs() / 4.81e5 < 0.01);
        assert!(ev.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(p.constants().lipschitz, Some(3.8e4));
        assert_eq!(p.constants().strong_convexity, Some(7.9e-2));
    }

    #[test]
    fn interpolation_at_origin_without_noise() {
        let p = stiff_diag_quadratic(0.1, 10.0, 4, 0.0);
        assert!(p.interpolating());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = p.stoch_grad(&[0.0; 4], &mut rng);
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sgd_stability_boundary_on_scalar_problem() {
        // Deterministic SGD on ½λw² diverges iff α > 2/λ.
        let p = stiff_diag_quadratic(5.0, 5.0, 1, 0.0);
        let lambda = p.eigenvalues()[0];
        let run = |alpha: f64| {
            let mut w = 1.0;
            for _ in 0..200 {
                w -= alpha * lambda * w;
            }
            w.abs()
        };
        assert!(run(2.0 / lambda * 0.9) < 1.0);
        assert!(run(2.0 / lambda * 1.1) > 1e3);
    }

    #[test]
    fn sc_quadratic_constants() {
        let p = strongly_convex_quadratic(1.0, 10.0, 10, 0.1);
        assert_eq!(p.constants().strong_convexity, Some(1.0));
        assert_eq!(p.constants().lipschitz, Some(10.0));
        let expected_sigma = 0.1 * 0.1 * 10.0;
        assert!((p.constants().sigma_sq.unwrap() - expected_sigma).abs() < 1e-15);
        let w_star = p.constants().minimizer.clone().unwrap();
        assert_eq!(p.value(&w_star), 0.0);
        assert!(p.full_grad(&w_star).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn sc_quadratic_gradient_growth_inequality() {
        // 2c(F(w) − F*) ≤ ‖∇F(w)‖² for quadratics; spot check on random points.
        let p = strongly_convex_quadratic(0.5, 7.0, 8, 0.0);
        let c = p.constants().strong_convexity.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let w: Vec<f64> = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let gap = p.value(&w) - 0.0;
            let gsq: f64 = p.full_grad(&w).iter().map(|v| v * v).sum();
            assert!(2.0 * c * gap <= gsq * (1.0 + 1e-12));
        }
    }
}
