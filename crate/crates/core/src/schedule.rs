//! Step-size schedules `k ↦ α_k`.

use crate::error::{Error, Result};

/// A rule mapping the 1-based iteration counter to a positive step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `α_k = β/(k + γ)`, strictly decreasing.
    InverseLinear { beta: f64, gamma: f64 },
    /// `α_k = β` for all k.
    Constant { beta: f64 },
    /// `α_k = 1/√K` where K is the total number of iterations.
    HorizonSqrt { horizon: u64 },
    /// `α_k = 1/K` where K is the total number of iterations.
    HorizonInverse { horizon: u64 },
    /// `α_k = β/(1 + 1e-4·k)`.
    TrainingDecay { beta: f64 },
}

impl StepSchedule {
    /// Build a schedule from loosely-typed configuration parts.
    ///
    /// `kind` is one of `inverse-linear`, `constant`, `horizon-sqrt`,
    /// `horizon-inverse`, `training-decay`.
    pub fn from_parts(
        kind: &str,
        beta: Option<f64>,
        gamma: Option<f64>,
        horizon: Option<u64>,
    ) -> Result<Self> {
        let need_beta = || {
            let b = beta.ok_or_else(|| {
                Error::Config(format!("schedule `{kind}` requires a beta parameter"))
            })?;
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::Config(format!(
                    "schedule `{kind}` requires beta > 0, got {b}"
                )));
            }
            Ok(b)
        };
        let need_horizon = || {
            let h = horizon
                .ok_or_else(|| Error::Config(format!("schedule `{kind}` requires a horizon K")))?;
            if h == 0 {
                return Err(Error::Config(format!(
                    "schedule `{kind}` requires horizon ≥ 1"
                )));
            }
            Ok(h)
        };
        match kind {
            "inverse-linear" => {
                let g = gamma.unwrap_or(0.0);
                if !(g.is_finite() && g >= 0.0) {
                    return Err(Error::Config(format!(
                        "inverse-linear schedule requires gamma ≥ 0, got {g}"
                    )));
                }
                Ok(Self::InverseLinear {
                    beta: need_beta()?,
                    gamma: g,
                })
            }
            "constant" => Ok(Self::Constant { beta: need_beta()? }),
            "horizon-sqrt" => Ok(Self::HorizonSqrt {
                horizon: need_horizon()?,
            }),
            "horizon-inverse" => Ok(Self::HorizonInverse {
                horizon: need_horizon()?,
            }),
            "training-decay" => Ok(Self::TrainingDecay { beta: need_beta()? }),
            other => Err(Error::Config(format!("unknown schedule kind `{other}`"))),
        }
    }

    /// The step size at iteration `k ≥ 1`.
    pub fn alpha_at(&self, k: u64) -> f64 {
        debug_assert!(k >= 1, "iteration counter is 1-based");
        match *self {
            StepSchedule::InverseLinear { beta, gamma } => beta / (k as f64 + gamma),
            StepSchedule::Constant { beta } => beta,
            StepSchedule::HorizonSqrt { horizon } => 1.0 / (horizon as f64).sqrt(),
            StepSchedule::HorizonInverse { horizon } => 1.0 / horizon as f64,
            StepSchedule::TrainingDecay { beta } => beta / (1.0 + 1e-4 * k as f64),
        }
    }

    /// `Σ_{k=1}^{K} α_k`, summed exactly term by term.
    pub fn partial_sum(&self, k_max: u64) -> f64 {
        (1..=k_max).map(|k| self.alpha_at(k)).sum()
    }

    /// `Σ_{k=1}^{K} α_k²`, summed exactly term by term.
    pub fn partial_sum_sq(&self, k_max: u64) -> f64 {
        (1..=k_max).map(|k| self.alpha_at(k).powi(2)).sum()
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            StepSchedule::InverseLinear { .. } => "inverse-linear",
            StepSchedule::Constant { .. } => "constant",
            StepSchedule::HorizonSqrt { .. } => "horizon-sqrt",
            StepSchedule::HorizonInverse { .. } => "horizon-inverse",
            StepSchedule::TrainingDecay { .. } => "training-decay",
        }
    }

    /// A short human-readable description used in run metadata.
    pub fn describe(&self) -> String {
        match *self {
            StepSchedule::InverseLinear { beta, gamma } => {
                format!("inverse-linear(beta={beta},gamma={gamma})")
            }
            StepSchedule::Constant { beta } => format!("constant(beta={beta})"),
            StepSchedule::HorizonSqrt { horizon } => format!("horizon-sqrt(K={horizon})"),
            StepSchedule::HorizonInverse { horizon } => format!("horizon-inverse(K={horizon})"),
            StepSchedule::TrainingDecay { beta } => format!("training-decay(beta={beta})"),
        }
    }
}
