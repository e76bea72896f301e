//! Scalar clipping functions and their component-wise vector lifts.
//!
//! A clipping scheme is a pair of scalar functions `g` and `h` tied together
//! by the identity
//!
//! ```text
//! α·g(x, α) = α·x − α²·h(x, α)
//! ```
//!
//! so that the update `w − α·G(∇f, α)` is a second-order perturbation of a
//! plain gradient step. Each scheme carries envelope constants `c_g` and
//! `c_h` with
//!
//! ```text
//! |g(x, α)| ≤ c_g·|x|    and    |h(x, α)| ≤ c_h·x²
//! ```
//!
//! for every real `x` and every `α > 0`. The vector forms apply `g` and `h`
//! independently to each component.

use crate::error::{Error, Result};

/// The built-in scheme families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClipKind {
    /// `g(x, α) = γx / (γ + α|x|)`
    Tamed,
    /// `g(x, α) = arctan(αx) / α`
    Arctan,
    /// `g(x, α) = sign(x)·ln(1 + α|x|) / α`
    Log,
    /// `g(x, α) = sin(αx) / α`
    Sin,
    /// `g(x, α) = x`, i.e. no clipping at all.
    Identity,
}

impl ClipKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClipKind::Tamed => "tamed",
            ClipKind::Arctan => "arctan",
            ClipKind::Log => "log",
            ClipKind::Sin => "sin",
            ClipKind::Identity => "identity",
        }
    }
}

/// One clipping family with its parameter and envelope constants.
///
/// Values are immutable after construction and can be shared freely across
/// concurrent runs; all operations are pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipScheme {
    kind: ClipKind,
    /// The γ parameter of the tamed family. Stored as 1 for the others,
    /// where it has no effect.
    gamma: f64,
    c_g: f64,
    c_h: f64,
}

/// Below this value of `|αx|` the cancellation in `x/α − g(x,α)/α` eats more
/// than half the mantissa, so `h` switches to a truncated series. The series
/// truncation error and the cancellation error at the threshold are both
/// under 1e-11 relative.
const SERIES_THRESHOLD: f64 = 1e-2;

impl ClipScheme {
    /// The tamed family `γx/(γ + α|x|)` with `c_g = 1`, `c_h = 1/γ`.
    pub fn tamed(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tamed scheme needs gamma > 0, got {gamma}"
            )));
        }
        Ok(Self {
            kind: ClipKind::Tamed,
            gamma,
            c_g: 1.0,
            c_h: 1.0 / gamma,
        })
    }

    /// The arctan family with `c_g = 1`, `c_h = 1/3`.
    pub fn arctan() -> Self {
        Self {
            kind: ClipKind::Arctan,
            gamma: 1.0,
            c_g: 1.0,
            c_h: 1.0 / 3.0,
        }
    }

    /// The logarithmic family with `c_g = 1`, `c_h = 1/2`.
    pub fn log() -> Self {
        Self {
            kind: ClipKind::Log,
            gamma: 1.0,
            c_g: 1.0,
            c_h: 0.5,
        }
    }

    /// The trigonometric family with `c_g = 1`, `c_h = 1/2`.
    pub fn sin() -> Self {
        Self {
            kind: ClipKind::Sin,
            gamma: 1.0,
            c_g: 1.0,
            c_h: 0.5,
        }
    }

    /// No clipping: `g(x, α) = x`, `h ≡ 0`. Reproduces plain SGD exactly.
    pub fn identity() -> Self {
        Self {
            kind: ClipKind::Identity,
            gamma: 1.0,
            c_g: 1.0,
            c_h: 0.0,
        }
    }

    /// Resolve a scheme by its catalogue name. `gamma` is only consulted for
    /// `tamed`; passing it for another scheme is an error.
    pub fn by_name(name: &str, gamma: Option<f64>) -> Result<Self> {
        match (name, gamma) {
            ("tamed", g) => Self::tamed(g.unwrap_or(DEFAULT_TAMED_GAMMA)),
            ("arctan", None) => Ok(Self::arctan()),
            ("log", None) => Ok(Self::log()),
            ("sin", None) => Ok(Self::sin()),
            ("identity", None) => Ok(Self::identity()),
            ("arctan" | "log" | "sin" | "identity", Some(_)) => Err(Error::InvalidArgument(
                format!("scheme `{name}` does not take a gamma parameter"),
            )),
            _ => Err(Error::InvalidArgument(format!(
                "unknown clip scheme `{name}` (expected tamed, arctan, log, sin or identity)"
            ))),
        }
    }

    pub fn kind(&self) -> ClipKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.as_str()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Envelope constant of `g`: `|g(x, α)| ≤ c_g·|x|`.
    pub fn c_g(&self) -> f64 {
        self.c_g
    }

    /// Envelope constant of `h`: `|h(x, α)| ≤ c_h·x²`.
    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    /// The scalar clipping function `g`.
    ///
    /// All four proper families are computed as `x` times a rescaling factor
    /// in `[-1, 1]`, so the envelope `|g| ≤ |x|` holds for the rounded result
    /// as well, not just in exact arithmetic.
    pub fn g(&self, x: f64, alpha: f64) -> Result<f64> {
        check_scalar_args(x, alpha)?;
        Ok(self.g_unchecked(x, alpha))
    }

    /// The scalar correction `h` defined by `α·g(x,α) = α·x − α²·h(x,α)`.
    pub fn h(&self, x: f64, alpha: f64) -> Result<f64> {
        check_scalar_args(x, alpha)?;
        Ok(self.h_unchecked(x, alpha))
    }

    /// Component-wise `g` over a gradient vector.
    pub fn apply_g(&self, grad: &[f64], alpha: f64) -> Result<Vec<f64>> {
        check_vector_args(grad, alpha)?;
        Ok(grad.iter().map(|&x| self.g_unchecked(x, alpha)).collect())
    }

    /// Component-wise `h` over a gradient vector.
    pub fn apply_h(&self, grad: &[f64], alpha: f64) -> Result<Vec<f64>> {
        check_vector_args(grad, alpha)?;
        Ok(grad.iter().map(|&x| self.h_unchecked(x, alpha)).collect())
    }

    pub(crate) fn g_unchecked(&self, x: f64, alpha: f64) -> f64 {
        match self.kind {
            ClipKind::Identity => x,
            ClipKind::Tamed => {
                let t = self.gamma / (self.gamma + alpha * x.abs());
                t * x
            }
            ClipKind::Arctan => {
                let u = alpha * x;
                let t = if u == 0.0 { 1.0 } else { u.atan() / u };
                t * x
            }
            ClipKind::Log => {
                let u = alpha * x.abs();
                let t = if u == 0.0 { 1.0 } else { u.ln_1p() / u };
                t * x
            }
            ClipKind::Sin => {
                let u = alpha * x;
                let t = if u == 0.0 { 1.0 } else { u.sin() / u };
                t * x
            }
        }
    }

    pub(crate) fn h_unchecked(&self, x: f64, alpha: f64) -> f64 {
        let h = match self.kind {
            ClipKind::Identity => return 0.0,
            ClipKind::Tamed => (x.abs() / (self.gamma + alpha * x.abs())) * x,
            ClipKind::Arctan => {
                let u = alpha * x;
                if u.abs() < SERIES_THRESHOLD {
                    // (u³/3 − u⁵/5 + u⁷/7 − u⁹/9 + …)/α²
                    let u2 = u * u;
                    x * x * u / 3.0 * (1.0 - u2 * (3.0 / 5.0 - u2 * (3.0 / 7.0 - u2 / 3.0)))
                } else {
                    let t = u.atan() / u;
                    x * (1.0 - t) / alpha
                }
            }
            ClipKind::Log => {
                let u = alpha * x.abs();
                if u < SERIES_THRESHOLD {
                    // sign(x)·(u²/2 − u³/3 + u⁴/4 − …)/α²
                    x.signum() * x * x / 2.0
                        * (1.0
                            - u * (2.0 / 3.0
                                - u * (0.5
                                    - u * (2.0 / 5.0
                                        - u * (1.0 / 3.0 - u * (2.0 / 7.0 - u / 4.0))))))
                } else {
                    let t = u.ln_1p() / u;
                    x * (1.0 - t) / alpha
                }
            }
            ClipKind::Sin => {
                let u = alpha * x;
                if u.abs() < SERIES_THRESHOLD {
                    // (u³/6 − u⁵/120 + u⁷/5040 − …)/α²
                    let u2 = u * u;
                    x * x * u / 6.0 * (1.0 - u2 * (1.0 / 20.0 - u2 * (1.0 / 840.0 - u2 / 60480.0)))
                } else {
                    let t = u.sin() / u;
                    x * (1.0 - t) / alpha
                }
            }
        };
        // Keep the rounded value inside the analytic envelope |h| ≤ c_h·x².
        let bound = self.c_h * x * x;
        h.clamp(-bound, bound)
    }
}

/// Default γ for the tamed scheme when none is given.
pub const DEFAULT_TAMED_GAMMA: f64 = 1.0 / 3.0;

fn check_scalar_args(x: f64, alpha: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite input {x}")));
    }
    check_alpha(alpha)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step size must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

fn check_vector_args(grad: &[f64], alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if let Some(i) = grad.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite gradient component at index {i}: {}",
            grad[i]
        )));
    }
    Ok(())
}

/// The five built-in schemes with their envelope constants. The tamed
/// instance uses the default γ = 1/3.
pub fn catalogue() -> Vec<ClipScheme> {
    vec![
        ClipScheme::tamed(DEFAULT_TAMED_GAMMA).expect("default gamma is positive"),
        ClipScheme::arctan(),
        ClipScheme::log(),
        ClipScheme::sin(),
        ClipScheme::identity(),
    ]
}

/// The four proper clipping families (catalogue minus the identity).
pub fn proper_schemes() -> Vec<ClipScheme> {
    catalogue()
        .into_iter()
        .filter(|s| s.kind() != ClipKind::Identity)
        .collect()
}
