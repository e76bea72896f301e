//! Per-step error constants and the closed-form rate bounds built from them.

use crate::clip::ClipScheme;
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::schedule::StepSchedule;

/// Whether a constant is analytic or a data-derived estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Estimated,
}

/// A constant together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tagged {
    pub value: f64,
    pub provenance: Provenance,
}

impl Tagged {
    pub fn exact(value: f64) -> Self {
        Tagged {
            value,
            provenance: Provenance::Exact,
        }
    }

    pub fn estimated(value: f64) -> Self {
        Tagged {
            value,
            provenance: Provenance::Estimated,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.provenance == Provenance::Exact
    }
}

/// The per-step error constants entering every rate bound.
///
/// `b_variance` holds under bounded gradient noise at the minimizer:
///
/// ```text
/// b_variance = 2·c_h·L³·M + 2·c_h·L·M^{1/3}·σ² + c_g²·L³·M^{2/3} + c_g²·L·σ²
/// ```
///
/// `b_interpolation` is the sharper constant available when every stochastic
/// gradient vanishes at the minimizer:
///
/// ```text
/// b_interpolation = c_h·L³·M + (c_g²·L³/2)·M^{2/3}
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants {
    pub lipschitz: f64,
    pub third_moment: Tagged,
    pub sigma_sq: Tagged,
    pub c_g: f64,
    pub c_h: f64,
    pub b_variance: f64,
    pub b_interpolation: Option<f64>,
}

impl BoundConstants {
    /// The constant to use in a bound: the interpolation one when available,
    /// otherwise the variance one.
    pub fn preferred(&self) -> f64 {
        self.b_interpolation.unwrap_or(self.b_variance)
    }

    /// True when every ingredient is analytic.
    pub fn all_exact(&self) -> bool {
        self.third_moment.is_exact() && self.sigma_sq.is_exact()
    }
}

/// Assemble the error constants from explicit ingredients.
pub fn bound_constants_with(
    lipschitz: f64,
    third_moment: Tagged,
    sigma_sq: Tagged,
    c_g: f64,
    c_h: f64,
    interpolating: bool,
) -> BoundConstants {
    let l = lipschitz;
    let m = third_moment.value;
    let s2 = sigma_sq.value;
    let b_variance = 2.0 * c_h * l.powi(3) * m
        + 2.0 * c_h * l * m.cbrt() * s2
        + c_g * c_g * l.powi(3) * m.powf(2.0 / 3.0)
        + c_g * c_g * l * s2;
    let b_interpolation = interpolating
        .then(|| c_h * l.powi(3) * m + c_g * c_g * l.powi(3) / 2.0 * m.powf(2.0 / 3.0));
    BoundConstants {
        lipschitz,
        third_moment,
        sigma_sq,
        c_g,
        c_h,
        b_variance,
        b_interpolation,
    }
}

/// Build the constants from a problem's catalogue entries and a clipping
/// scheme, with `third_moment_estimate` filling in for problems that do not
/// carry an a-priori moment bound.
///
/// Requesting the interpolation constant on a non-interpolating problem is a
/// hard error, as is a missing σ² when interpolation is not assumed.
pub fn bound_constants(
    problem: &dyn Problem,
    scheme: &ClipScheme,
    use_interpolation: bool,
    third_moment_estimate: Option<f64>,
) -> Result<BoundConstants> {
    let consts = problem.constants();
    let lipschitz = consts
        .lipschitz
        .ok_or(Error::MissingConstant("lipschitz"))?;
    let third_moment = match (consts.third_moment, third_moment_estimate) {
        (Some(m), _) => Tagged::exact(m),
        (None, Some(m)) => Tagged::estimated(m),
        (None, None) => return Err(Error::MissingConstant("third_moment")),
    };
    if use_interpolation && !problem.interpolating() {
        return Err(Error::MissingConstant(
            "interpolation (stochastic gradients do not vanish at the minimizer)",
        ));
    }
    let sigma_sq = if use_interpolation {
        Tagged::exact(0.0)
    } else {
        let s2 = consts.sigma_sq.ok_or(Error::MissingConstant("sigma_sq"))?;
        Tagged {
            value: s2,
            provenance: if consts.sigma_sq_exact {
                Provenance::Exact
            } else {
                Provenance::Estimated
            },
        }
    };
    Ok(bound_constants_with(
        lipschitz,
        third_moment,
        sigma_sq,
        scheme.c_g(),
        scheme.c_h(),
        use_interpolation,
    ))
}

/// Bound on `min_{1≤k≤K} E‖∇F(w_k)‖²` for an arbitrary schedule, using the
/// exact partial sums:
///
/// ```text
/// (F(w₁) − F*)/Σα_k + B·Σα_k²/Σα_k
/// ```
pub fn min_grad_sq_bound(
    f_w1: f64,
    f_star: f64,
    b: f64,
    schedule: &StepSchedule,
    k_max: u64,
) -> f64 {
    let sum = schedule.partial_sum(k_max);
    let sum_sq = schedule.partial_sum_sq(k_max);
    (f_w1 - f_star) / sum + b * sum_sq / sum
}

/// The closed-form version of the same bound for `α_k = β/(k+γ)`:
///
/// ```text
/// (F(w₁) − F*)/(β·ln(K+γ+1)) + B·β(2+γ)/ln(K+γ+1)
/// ```
pub fn inv_linear_min_grad_bound(
    f_w1: f64,
    f_star: f64,
    b: f64,
    beta: f64,
    gamma: f64,
    k_max: u64,
) -> f64 {
    let log_term = (k_max as f64 + gamma + 1.0).ln();
    (f_w1 - f_star) / (beta * log_term) + b * beta * (2.0 + gamma) / log_term
}

/// Variant with the `(1+γ)²` factor the partial-sum estimate
/// `Σα² ≤ β²(2+γ)/(1+γ)²` actually yields; always at most the stated form.
pub fn inv_linear_min_grad_bound_tight(
    f_w1: f64,
    f_star: f64,
    b: f64,
    beta: f64,
    gamma: f64,
    k_max: u64,
) -> f64 {
    let log_term = (k_max as f64 + gamma + 1.0).ln();
    (f_w1 - f_star) / (beta * log_term)
        + b * beta * (2.0 + gamma) / ((1.0 + gamma) * (1.0 + gamma) * log_term)
}

/// Function-value gap bound for strongly convex objectives under
/// `α_k = β/(k+γ)`:
///
/// ```text
/// ((1+γ)/(k+1+γ))^{2βc}·(F(w₁) − F*) + B·e^{2βc/(1+γ)}/(2βc−1) · 1/(k+1+γ)
/// ```
///
/// valid for `β ∈ (1/(2c), (1+γ)/(2c))`; the hypothesis is enforced.
pub fn strongly_convex_gap_bound(
    f_w1: f64,
    f_star: f64,
    b: f64,
    beta: f64,
    gamma: f64,
    c: f64,
    k: u64,
) -> Result<f64> {
    if !(c > 0.0 && beta > 1.0 / (2.0 * c) && beta < (1.0 + gamma) / (2.0 * c)) {
        return Err(Error::HypothesisViolation(format!(
            "beta = {beta} must lie in (1/(2c), (1+gamma)/(2c)) = ({}, {})",
            1.0 / (2.0 * c),
            (1.0 + gamma) / (2.0 * c)
        )));
    }
    let two_beta_c = 2.0 * beta * c;
    let kf = k as f64;
    let decay = ((1.0 + gamma) / (kf + 1.0 + gamma)).powf(two_beta_c);
    let noise = b * (two_beta_c / (1.0 + gamma)).exp() / (two_beta_c - 1.0) / (kf + 1.0 + gamma);
    Ok(decay * (f_w1 - f_star) + noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    #[test]
    fn sgd_constants_collapse() {
        // c_g = 1, c_h = 0, σ² = 0 ⇒ b_variance = L³·M^{2/3}.
        let bc = bound_constants_with(2.0, Tagged::exact(8.0), Tagged::exact(0.0), 1.0, 0.0, false);
        assert!((bc.b_variance - 8.0 * 4.0).abs() < 1e-12);
        assert!(bc.b_interpolation.is_none());

        // With noise the extra L·σ² term appears.
        let bc = bound_constants_with(2.0, Tagged::exact(8.0), Tagged::exact(3.0), 1.0, 0.0, false);
        assert!((bc.b_variance - (8.0 * 4.0 + 2.0 * 3.0)).abs() < 1e-12);
    }

    #[test]
    fn hand_plugged_constants() {
        // L = 1, M = 1, σ² = 0, c_g = 1, c_h = 1/2:
        // b_variance = 2·(1/2) + 1 = 2 and b_interpolation = 1/2 + 1/2 = 1.
        let bc = bound_constants_with(1.0, Tagged::exact(1.0), Tagged::exact(0.0), 1.0, 0.5, true);
        assert!((bc.b_variance - 2.0).abs() < 1e-15);
        assert!((bc.b_interpolation.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interpolation_constant_never_exceeds_variance_constant() {
        let grid = [0.5, 1.0, 4.0];
        for &l in &grid {
            for &m in &grid {
                for &s2 in &[0.0, 0.3, 2.0] {
                    for &ch in &[0.0, 0.5, 3.0] {
                        let bc = bound_constants_with(
                            l,
                            Tagged::exact(m),
                            Tagged::exact(s2),
                            1.0,
                            ch,
                            true,
                        );
                        assert!(bc.b_interpolation.unwrap() <= bc.b_variance);
                        assert!(bc.b_interpolation.unwrap() >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn missing_constants_are_named() {
        let p = problems::quartic(); // no Lipschitz constant
        let scheme = crate::clip::ClipScheme::arctan();
        let err = bound_constants(&p, &scheme, false, Some(1.0)).unwrap_err();
        assert!(err.to_string().contains("lipschitz"));

        let p = problems::strongly_convex_quadratic(1.0, 10.0, 4, 0.1);
        let err = bound_constants(&p, &scheme, false, None).unwrap_err();
        assert!(err.to_string().contains("third_moment"));
        let err = bound_constants(&p, &scheme, true, Some(1.0)).unwrap_err();
        assert!(err.to_string().contains("interpolation"));
    }

    #[test]
    fn min_grad_bound_constant_schedule_closed_form() {
        // Constant α over K steps: ΔF/(Kα) + B·α.
        let schedule = StepSchedule::Constant { beta: 0.1 };
        let bound = min_grad_sq_bound(5.0, 1.0, 2.0, &schedule, 40);
        assert!((bound - (4.0 / 4.0 + 2.0 * 0.1)).abs() < 1e-12);

        // α ≡ 1/√K: ΔF/√K + B/√K.
        let schedule = StepSchedule::HorizonSqrt { horizon: 100 };
        let bound = min_grad_sq_bound(3.0, 0.0, 1.5, &schedule, 100);
        assert!((bound - (3.0 / 10.0 + 1.5 / 10.0)).abs() < 1e-12);

        assert_eq!(min_grad_sq_bound(1.0, 1.0, 0.0, &schedule, 100), 0.0);
    }

    #[test]
    fn inv_linear_bound_hand_example() {
        // ΔF = 0, B = 1, β = 1, γ = 1: the bound is 3/ln(K+2), which is 3/2
        // when the log equals 2 (K = e² − 2 ≈ 5.4; nearest integer K = 5).
        let bound = inv_linear_min_grad_bound(1.0, 1.0, 1.0, 1.0, 1.0, 5);
        assert!((bound - 3.0 / 7.0f64.ln()).abs() < 1e-12);
        assert!((bound - 1.5).abs() < 0.05);
    }

    #[test]
    fn inv_linear_bound_decreases_in_k_and_dominates_exact_sums() {
        let (beta, gamma, b) = (0.5, 1.0, 2.0);
        let schedule = StepSchedule::InverseLinear { beta, gamma };
        let mut prev = f64::INFINITY;
        for k in [10u64, 100, 1_000, 10_000, 100_000] {
            let stated = inv_linear_min_grad_bound(4.0, 0.0, b, beta, gamma, k);
            let tight = inv_linear_min_grad_bound_tight(4.0, 0.0, b, beta, gamma, k);
            let exact = min_grad_sq_bound(4.0, 0.0, b, &schedule, k);
            assert!(stated < prev);
            assert!(tight <= stated);
            assert!(
                stated >= exact,
                "stated {stated} vs exact partial sums {exact} at K={k}"
            );
            prev = stated;
        }
    }

    #[test]
    fn strongly_convex_bound_examples() {
        // B = 0 leaves the pure decay term ((1+γ)/(k+1+γ))^{2βc}·ΔF.
        let v = strongly_convex_gap_bound(2.0, 1.0, 0.0, 0.75, 1.0, 1.0, 9).unwrap();
        assert!((v - (2.0f64 / 11.0).powf(1.5)).abs() < 1e-12);

        // Hand plug-in at k = 0: ΔF + B·e^{0.75}.
        let v = strongly_convex_gap_bound(3.0, 1.0, 2.0, 0.75, 1.0, 1.0, 0).unwrap();
        assert!((v - (2.0 + 2.0 * (0.75f64).exp())).abs() < 1e-12);

        // The admissible β window is enforced on both sides.
        assert!(strongly_convex_gap_bound(1.0, 0.0, 1.0, 0.4, 1.0, 1.0, 5).is_err());
        assert!(strongly_convex_gap_bound(1.0, 0.0, 1.0, 1.1, 1.0, 1.0, 5).is_err());
    }

    #[test]
    fn strongly_convex_bound_asymptotic_rate() {
        // bound·(k+1+γ) approaches B·e^{2βc/(1+γ)}/(2βc−1).
        let (b, beta, gamma, c) = (2.0, 0.75, 1.0, 1.0);
        let limit = b * (1.5f64 / 2.0).exp() / 0.5;
        let k = 100_000_000u64;
        let v = strongly_convex_gap_bound(7.0, 0.0, b, beta, gamma, c, k).unwrap();
        let scaled = v * (k as f64 + 2.0);
        assert!((scaled - limit).abs() / limit < 1e-3);
    }
}
