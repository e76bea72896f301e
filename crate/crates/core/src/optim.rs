//! The iteration engine: update rules and the seeded run loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clip::ClipScheme;
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::record::{RunMeta, RunRecord, TracePoint};
use crate::schedule::StepSchedule;

/// Iterates whose norm exceeds this are declared diverged, well before f64
/// overflow, so records stay comparable across methods.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_HARD_CLIP_RADIUS: f64 = 1.0;
pub const DEFAULT_NORM_CLIP_GAMMA: f64 = 1.0;
pub const DEFAULT_ADAM_BETA1: f64 = 0.9;
pub const DEFAULT_ADAM_BETA2: f64 = 0.999;
pub const DEFAULT_ADAM_EPSILON: f64 = 1e-7;

/// An update rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// `w ← w − α·G(∇f, α)` with a component-wise clipping scheme.
    SoftClipCw { scheme: ClipScheme },
    /// `w ← w − αγ/(γ + α‖∇f‖)·∇f`: rescaling by the full gradient norm.
    SoftClipNorm { gamma: f64 },
    /// Plain stochastic gradient descent.
    Sgd,
    /// Heavy-ball momentum: `v ← μv + ∇f`, `w ← w − αv`.
    SgdMomentum { mu: f64 },
    /// Projection of the step onto a ball: `w ← w − α·min(1, γ/‖∇f‖)·∇f`.
    HardClip { gamma_c: f64 },
    /// Adam with bias-corrected moments and ε added to the square-rooted
    /// second moment.
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl Method {
    /// The configuration-facing method name.
    pub fn name(&self) -> &'static str {
        match self {
            Method::SoftClipCw { .. } => "softclip_cw",
            Method::SoftClipNorm { .. } => "softclip_norm",
            Method::Sgd => "sgd",
            Method::SgdMomentum { .. } => "sgd_momentum",
            Method::HardClip { .. } => "hard_clip",
            Method::Adam { .. } => "adam",
        }
    }

    /// Name plus parameters, for run metadata.
    pub fn describe(&self) -> String {
        match self {
            Method::SoftClipCw { scheme } => {
                format!("softclip_cw({},gamma={})", scheme.name(), scheme.gamma())
            }
            Method::SoftClipNorm { gamma } => format!("softclip_norm(gamma={gamma})"),
            Method::Sgd => "sgd".to_string(),
            Method::SgdMomentum { mu } => format!("sgd_momentum(mu={mu})"),
            Method::HardClip { gamma_c } => format!("hard_clip(gamma_c={gamma_c})"),
            Method::Adam {
                beta1,
                beta2,
                epsilon,
            } => {
                format!("adam(beta1={beta1},beta2={beta2},epsilon={epsilon})")
            }
        }
    }

    pub fn adam_defaults() -> Method {
        Method::Adam {
            beta1: DEFAULT_ADAM_BETA1,
            beta2: DEFAULT_ADAM_BETA2,
            epsilon: DEFAULT_ADAM_EPSILON,
        }
    }
}

/// A method together with its step-size schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSpec {
    pub method: Method,
    pub schedule: StepSchedule,
}

#[derive(Debug, Clone, PartialEq)]
enum Aux {
    None,
    Momentum(Vec<f64>),
    Adam { m: Vec<f64>, v: Vec<f64> },
}

/// Mutable per-run state: the iterate, the 1-based step counter and any
/// method-specific accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    w: Vec<f64>,
    k: u64,
    aux: Aux,
}

impl OptimizerState {
    pub fn new(method: &Method, w1: Vec<f64>) -> Self {
        let d = w1.len();
        let aux = match method {
            Method::SgdMomentum { .. } => Aux::Momentum(vec![0.0; d]),
            Method::Adam { .. } => Aux::Adam {
                m: vec![0.0; d],
                v: vec![0.0; d],
            },
            _ => Aux::None,
        };
        OptimizerState { w: w1, k: 1, aux }
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn k(&self) -> u64 {
        self.k
    }
}

/// Apply one update `w_k → w_{k+1}` using the stochastic gradient drawn at
/// `w_k`, then advance the counter.
///
/// Non-finite gradient entries and iterates that leave the admissible region
/// both surface as [`Error::Diverged`]; the state keeps the offending iterate
/// so callers can record it.
pub fn step(spec: &OptimizerSpec, state: &mut OptimizerState, grad: &[f64]) -> Result<()> {
    if grad.len() != state.w.len() {
        return Err(Error::InvalidArgument(format!(
            "gradient dimension {} does not match iterate dimension {}",
            grad.len(),
            state.w.len()
        )));
    }
    if !grad.iter().all(|g| g.is_finite()) {
        return Err(Error::Diverged {
            step: state.k,
            norm: norm(grad),
        });
    }
    let alpha = spec.schedule.alpha_at(state.k);

    match &spec.method {
        Method::SoftClipCw { scheme } => {
            for (wi, &gi) in state.w.iter_mut().zip(grad) {
                *wi -= alpha * scheme.g_unchecked(gi, alpha);
            }
        }
        Method::SoftClipNorm { gamma } => {
            let scale = alpha * gamma / (gamma + alpha * norm(grad));
            for (wi, &gi) in state.w.iter_mut().zip(grad) {
                *wi -= scale * gi;
            }
        }
        Method::Sgd => {
            for (wi, &gi) in state.w.iter_mut().zip(grad) {
                *wi -= alpha * gi;
            }
        }
        Method::SgdMomentum { mu } => {
            let Aux::Momentum(v) = &mut state.aux else {
                unreachable!("momentum state is created with the spec");
            };
            for ((wi, vi), &gi) in state.w.iter_mut().zip(v.iter_mut()).zip(grad) {
                *vi = mu * *vi + gi;
                *wi -= alpha * *vi;
            }
        }
        Method::HardClip { gamma_c } => {
            let gn = norm(grad);
            let scale = if gn > *gamma_c { gamma_c / gn } else { 1.0 };
            for (wi, &gi) in state.w.iter_mut().zip(grad) {
                *wi -= alpha * scale * gi;
            }
        }
        Method::Adam {
            beta1,
            beta2,
            epsilon,
        } => {
            let Aux::Adam { m, v } = &mut state.aux else {
                unreachable!("adam state is created with the spec");
            };
            let t = state.k as f64;
            let bc1 = 1.0 - beta1.powf(t);
            let bc2 = 1.0 - beta2.powf(t);
            for ((wi, (mi, vi)), &gi) in state
                .w
                .iter_mut()
                .zip(m.iter_mut().zip(v.iter_mut()))
                .zip(grad)
            {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / bc1;
                let v_hat = *vi / bc2;
                *wi -= alpha * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
    }
    state.k += 1;

    let wn = norm(&state.w);
    if !wn.is_finite() || wn > DIVERGENCE_THRESHOLD {
        return Err(Error::Diverged {
            step: state.k,
            norm: wn,
        });
    }
    Ok(())
}

/// Iterate `k = 1..=iters` from `w1`, drawing one stochastic gradient per
/// step from the problem's sampler seeded with `seed`.
///
/// Metrics are recorded at the pre-step iterate for `k = 1`, every
/// `record_every` steps thereafter, and at `k = iters`; the full gradient is
/// used for the recorded metrics. Divergence truncates the record and marks
/// it; it is an outcome, not an error.
pub fn run(
    spec: &OptimizerSpec,
    problem: &dyn Problem,
    w1: &[f64],
    seed: u64,
    iters: u64,
    record_every: u64,
) -> Result<RunRecord> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    if record_every == 0 {
        return Err(Error::InvalidArgument(
            "record_every must be at least 1".into(),
        ));
    }
    if w1.len() != problem.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial iterate has dimension {}, problem expects {}",
            w1.len(),
            problem.dim()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = OptimizerState::new(&spec.method, w1.to_vec());
    let mut trace = Vec::new();
    let mut diverged_at = None;

    for k in 1..=iters {
        if (k - 1) % record_every == 0 || k == iters {
            trace.push(trace_point(problem, spec, &state.w, k));
        }
        let grad = problem.stoch_grad(&state.w, &mut rng);
        match step(spec, &mut state, &grad) {
            Ok(()) => {}
            Err(Error::Diverged { step, .. }) => {
                diverged_at = Some(step);
                break;
            }
            Err(e) => return Err(e),
        }
    }

    Ok(RunRecord {
        meta: RunMeta {
            method: spec.method.describe(),
            schedule: spec.schedule.describe(),
            problem: problem.name().to_string(),
            seed,
            iters,
            diverged_at,
        },
        trace,
        final_w: state.w,
    })
}

fn trace_point(problem: &dyn Problem, spec: &OptimizerSpec, w: &[f64], k: u64) -> TracePoint {
    let grad = problem.full_grad(w);
    let dist = problem.constants().minimizer.as_ref().map(|ws| {
        w.iter()
            .zip(ws)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    });
    TracePoint {
        k,
        alpha: spec.schedule.alpha_at(k),
        f_value: problem.value(w),
        grad_norm_sq: grad.iter().map(|g| g * g).sum(),
        dist_to_opt: dist,
    }
}

/// The conventional initial iterate: all-ones scaled to norm 10.
pub fn default_start(dim: usize) -> Vec<f64> {
    vec![10.0 / (dim as f64).sqrt(); dim]
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
