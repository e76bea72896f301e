//! Component-wise soft-clipped stochastic gradient methods.
//!
//! The update rule at the center of the crate is
//!
//! ```text
//! w_{k+1} = w_k − α_k·G(∇f(w_k, ξ_k), α_k)
//! ```
//!
//! where `G` applies a scalar soft-clipping function to each gradient
//! component. [`clip`] houses the clipping families and their envelope
//! constants, [`optim`] the iteration engine together with the baseline
//! methods it is compared against, [`problems`] stochastic objectives with
//! analytically known constants, and [`diagnostics`] turns descent
//! inequalities and convergence-rate bounds into executable checks.
//!
//! ```
//! use softclip_core::{run, ClipScheme, Method, OptimizerSpec, StepSchedule};
//! use softclip_core::problems::stiff_diag_quadratic;
//!
//! // A stiff quadratic that plain SGD at this step size cannot handle.
//! let problem = stiff_diag_quadratic(7.9e-2, 3.8e4, 50, 1.0);
//! let spec = OptimizerSpec {
//!     method: Method::SoftClipCw { scheme: ClipScheme::tamed(1.0 / 3.0).unwrap() },
//!     schedule: StepSchedule::Constant { beta: 0.1 },
//! };
//! let w1 = softclip_core::default_start(50);
//! let record = run(&spec, &problem, &w1, 0, 480, 30).unwrap();
//! assert!(!record.diverged());
//! assert!(record.final_error(&vec![0.0; 50]) < 5.0);
//! ```

pub mod clip;
pub mod diagnostics;
pub mod error;
pub mod optim;
pub mod problems;
pub mod record;
pub mod schedule;

pub use clip::{catalogue, ClipKind, ClipScheme, DEFAULT_TAMED_GAMMA};
pub use error::{Error, Result};
pub use optim::{
    default_start, run, step, Method, OptimizerSpec, OptimizerState, DIVERGENCE_THRESHOLD,
};
pub use problems::{Constants, Problem};
pub use record::{RunMeta, RunRecord, TracePoint};
pub use schedule::StepSchedule;
