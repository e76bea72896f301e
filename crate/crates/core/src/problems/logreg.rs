//! Synthetic ridge-regularized logistic regression with single-sample
//! stochastic gradients.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Constants, Problem};

const RIDGE: f64 = 1e-4;
const MARGIN: f64 = 1.0;
const GRAD_TOL: f64 = 1e-10;
const MAX_SOLVE_ITERS: usize = 3_000_000;

/// Binary classification with logistic loss and a small ridge term:
///
/// ```text
/// F(w) = 1/n Σ_i ln(1 + exp(−y_i·x_iᵀw)) + 1e-4·‖w‖²
/// ```
///
/// The ridge keeps the minimizer finite even on separable data. The
/// minimizer and optimal value are computed once at construction by
/// deterministic full-gradient descent down to gradient norm 1e-10, and the
/// noise level at the minimizer is the exact finite-sum average of
/// `‖∇f_i(w*)‖²`.
#[derive(Debug, Clone)]
pub struct LogisticRegression {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    separable: bool,
    constants: Constants,
}

/// Generate a seeded instance. With `separable = true` every sample keeps a
/// margin of at least 1 from the generating hyperplane, so the data is
/// linearly separable and the optimal loss is small; otherwise 20% of the
/// labels are flipped.
pub fn logistic_regression(n: usize, d: usize, separable: bool, seed: u64) -> LogisticRegression {
    assert!(n >= 1 && d >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w_true: Vec<f64> = (0..d)
        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect();
    let norm = w_true.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in w_true.iter_mut() {
        *v /= norm;
    }

    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: Vec<f64> = loop {
            let cand: Vec<f64> = (0..d)
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let z: f64 = cand.iter().zip(&w_true).map(|(a, b)| a * b).sum();
            if separable {
                if z.abs() >= MARGIN {
                    break cand;
                }
            } else if z.abs() >= 1e-9 {
                break cand;
            }
        };
        let z: f64 = xi.iter().zip(&w_true).map(|(a, b)| a * b).sum();
        let mut label = z.signum();
        if !separable && rng.gen::<f64>() < 0.2 {
            label = -label;
        }
        x.push(xi);
        y.push(label);
    }

    let max_xsq = x
        .iter()
        .map(|xi| xi.iter().map(|v| v * v).sum::<f64>())
        .fold(f64::MIN, f64::max);
    let lipschitz = max_xsq / 4.0 + 2.0 * RIDGE;

    let mut problem = LogisticRegression {
        x,
        y,
        separable,
        constants: Constants::default(),
    };

    let minimizer = problem.solve_minimizer(lipschitz);
    let f_star = problem.value(&minimizer);
    let sigma_sq = (0..n)
        .map(|i| {
            problem
                .sample_grad(i, &minimizer)
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
        })
        .sum::<f64>()
        / n as f64;

    problem.constants = Constants {
        lipschitz: Some(lipschitz),
        strong_convexity: Some(2.0 * RIDGE),
        sigma_sq: Some(sigma_sq),
        sigma_sq_exact: true,
        minimizer: Some(minimizer),
        f_star: Some(f_star),
        ..Constants::default()
    };
    problem
}

impl LogisticRegression {
    pub fn n_samples(&self) -> usize {
        self.x.len()
    }

    pub fn separable(&self) -> bool {
        self.separable
    }

    /// Gradient of the i-th single-sample objective (loss plus ridge).
    pub fn sample_grad(&self, i: usize, w: &[f64]) -> Vec<f64> {
        let z: f64 = self.x[i].iter().zip(w).map(|(a, b)| a * b).sum();
        let yz = self.y[i] * z;
        // σ(−yz) = 1/(1 + e^{yz}), computed without overflow on both tails.
        let s = if yz >= 0.0 {
            let e = (-yz).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + yz.exp())
        };
        self.x[i]
            .iter()
            .zip(w)
            .map(|(&xij, &wj)| -self.y[i] * s * xij + 2.0 * RIDGE * wj)
            .collect()
    }

    fn solve_minimizer(&self, lipschitz: f64) -> Vec<f64> {
        let d = self.x[0].len();
        let mut w = vec![0.0; d];
        let step = 1.0 / lipschitz;
        for _ in 0..MAX_SOLVE_ITERS {
            let g = self.full_grad(&w);
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm <= GRAD_TOL {
                return w;
            }
            for (wj, gj) in w.iter_mut().zip(&g) {
                *wj -= step * gj;
            }
        }
        panic!(
            "gradient descent did not reach tolerance {GRAD_TOL} while solving for the minimizer"
        );
    }
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl Problem for LogisticRegression {
    fn name(&self) -> &str {
        "logreg"
    }

    fn dim(&self) -> usize {
        self.x[0].len()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let n = self.x.len() as f64;
        let loss: f64 = self
            .x
            .iter()
            .zip(&self.y)
            .map(|(xi, &yi)| {
                let z: f64 = xi.iter().zip(w).map(|(a, b)| a * b).sum();
                softplus(-yi * z)
            })
            .sum::<f64>()
            / n;
        let ridge: f64 = RIDGE * w.iter().map(|v| v * v).sum::<f64>();
        loss + ridge
    }

    fn full_grad(&self, w: &[f64]) -> Vec<f64> {
        let n = self.x.len();
        let d = w.len();
        let mut g = vec![0.0; d];
        for i in 0..n {
            let z: f64 = self.x[i].iter().zip(w).map(|(a, b)| a * b).sum();
            let yz = self.y[i] * z;
            let s = if yz >= 0.0 {
                let e = (-yz).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + yz.exp())
            };
            for (gj, xij) in g.iter_mut().zip(&self.x[i]) {
                *gj += -self.y[i] * s * xij;
            }
        }
        for (j, gj) in g.iter_mut().enumerate() {
            *gj = *gj / n as f64 + 2.0 * RIDGE * w[j];
        }
        g
    }

    fn stoch_grad(&self, w: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
        let i = rng.gen_range(0..self.x.len());
        self.sample_grad(i, w)
    }

    fn constants(&self) -> &Constants {
        &self.constants
    }

    fn interpolating(&self) -> bool {
        false
    }
}
