//! Declarative experiment configuration: TOML schema, dotted-path overrides,
//! defaults and fail-fast resolution against the library catalogues.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use softclip_core::clip::ClipScheme;
use softclip_core::optim::{self, default_start, Method, OptimizerSpec};
use softclip_core::problems::{
    self, logistic_regression, minibatch_quadratic, nonconvex_smooth, stiff_diag_quadratic,
    strongly_convex_quadratic, Problem,
};
use softclip_core::schedule::StepSchedule;

pub const DEFAULT_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const DEFAULT_BATCHES_PER_EPOCH: u64 = 32;
pub const DEFAULT_START_NORM: f64 = 10.0;

/// The step-size grid used by the sweep preset.
pub const PRESET_ALPHA_GRID: [f64; 11] = [
    1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1, 0.5, 1.0,
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(rename = "optimizer", default)]
    pub optimizers: Vec<OptimizerConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    /// quartic | appendix_e | stiff_diag | sc_quadratic | nonconvex | logreg
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convexity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separable: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Data-generation seed, independent of the run seeds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iters: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches_per_epoch: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
    /// Worker count is an execution detail: it never alters artifact bytes
    /// and is not echoed.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
    /// Output directory; also excluded from the echo.
    #[serde(skip_serializing)]
    pub out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w1: Option<StartConfig>,
}

/// Initial iterate: an explicit vector, or all-ones rescaled to a norm, or a
/// small all-ones offset added to the minimizer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartConfig {
    Explicit(Vec<f64>),
    Shaped {
        #[serde(skip_serializing_if = "Option::is_none")]
        norm: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        offset_from_minimizer: Option<f64>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    /// softclip_cw | softclip_norm | sgd | sgd_momentum | hard_clip | adam
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Clip scheme for softclip_cw: tamed | arctan | log | sin | identity.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    /// γ of the tamed scheme (softclip_cw) or of the norm rescaling
    /// (softclip_norm).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// inverse-linear | constant | horizon-sqrt | horizon-inverse |
    /// training-decay
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<AlphaGrid>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaGrid {
    Preset(String),
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// descent | min_grad_bound | sc_gap_bound | as_convergence | moments |
    /// gd_bounds
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub use_interpolation: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descent_points: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descent_samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub descent_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_checkpoints: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gd_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gd_iters: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_k_min: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_k_max: Option<u64>,
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::from_toml_str(&text, &[])
    }

    /// Parse TOML and apply `key=value` overrides on the raw value tree
    /// before deserializing, so overrides behave exactly like edits to the
    /// file.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Config> {
        let mut value: toml::Value = text.parse().context("config file is not valid TOML")?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let config: Config = value
            .try_into()
            .context("config does not match the schema")?;
        Ok(config)
    }

    /// The echoed configuration: defaults made explicit so a rerun from the
    /// echo reproduces the artifacts byte for byte.
    pub fn effective(&self, resolved: &Experiment) -> Config {
        let mut cfg = self.clone();
        cfg.run.seeds = Some(resolved.seeds.clone());
        cfg.run.iters = Some(resolved.iters);
        cfg.run.record_every = Some(resolved.record_every);
        cfg.run.workers = None;
        cfg.run.out = None;
        if cfg.run.w1.is_none() {
            cfg.run.w1 = Some(StartConfig::Shaped {
                norm: Some(DEFAULT_START_NORM),
                offset_from_minimizer: None,
            });
        }
        if cfg.problem.data_seed.is_none() {
            cfg.problem.data_seed = Some(0);
        }
        cfg
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).context("cannot serialize effective config")
    }
}

/// Apply one `dotted.path=value` override to a TOML tree. Numeric path
/// segments index into arrays (`optimizer.0.gamma=0.5`).
pub fn apply_override(root: &mut toml::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form key=value"))?;
    // Parse the raw text as a TOML literal (number, bool, array, inline
    // table, quoted string); anything unparseable is taken verbatim.
    let parsed: toml::Value = match format!("v = {raw}").parse::<toml::Value>() {
        Ok(doc) => doc
            .as_table()
            .and_then(|t| t.get("v").cloned())
            .unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let segments: Vec<&str> = path.split('.').collect();
    let mut cursor = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(index) = seg.parse::<usize>() {
            let arr = cursor
                .as_array_mut()
                .ok_or_else(|| anyhow!("`{}` is not an array", segments[..i].join(".")))?;
            if index >= arr.len() {
                bail!("index {index} out of bounds in `{path}`");
            }
            cursor = &mut arr[index];
            if last {
                bail!("override path `{path}` must end in a field name");
            }
        } else if last {
            let table = cursor
                .as_table_mut()
                .ok_or_else(|| anyhow!("`{}` is not a table", segments[..i].join(".")))?;
            table.insert(seg.to_string(), parsed);
            return Ok(());
        } else {
            let table = cursor
                .as_table_mut()
                .ok_or_else(|| anyhow!("`{}` is not a table", segments[..i].join(".")))?;
            cursor = table
                .entry(seg.to_string())
                .or_insert(toml::Value::Table(Default::default()));
        }
    }
    Ok(())
}

/// A fully resolved experiment: problem built, optimizers instantiated,
/// every referenced name already validated.
#[derive(Debug)]
pub struct Experiment {
    pub problem: Box<dyn Problem>,
    pub optimizers: Vec<LabeledOptimizer>,
    pub seeds: Vec<u64>,
    pub iters: u64,
    pub record_every: u64,
    pub workers: usize,
    pub w1: Vec<f64>,
    pub alpha_grid: Vec<f64>,
}

#[derive(Debug)]
pub struct LabeledOptimizer {
    pub label: String,
    pub spec: OptimizerSpec,
}

/// Validate the whole configuration and construct every component up front,
/// so that nothing fails after runs have started.
pub fn resolve(config: &Config) -> Result<Experiment> {
    let problem = build_problem(&config.problem)?;

    let seeds = config
        .run
        .seeds
        .clone()
        .unwrap_or_else(|| DEFAULT_SEEDS.to_vec());
    if seeds.is_empty() {
        bail!("run.seeds must not be empty");
    }
    {
        let mut sorted = seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            bail!("run.seeds contains duplicates");
        }
    }

    let iters = resolve_iters(&config.run)?;
    let record_every = config.run.record_every.unwrap_or(1);
    if record_every == 0 {
        bail!("run.record_every must be at least 1");
    }
    let workers = config.run.workers.unwrap_or(1).max(1);

    let w1 = resolve_start(config.run.w1.as_ref(), problem.as_ref())?;

    if config.optimizers.is_empty() {
        bail!("at least one [[optimizer]] block is required");
    }
    let mut optimizers = Vec::new();
    let mut labels = std::collections::HashSet::new();
    for (i, oc) in config.optimizers.iter().enumerate() {
        let labeled = build_optimizer(oc, iters)
            .with_context(|| format!("in [[optimizer]] block {i} (`{}`)", oc.method))?;
        crate::commands::validate_label(&labeled.label)?;
        if !labels.insert(labeled.label.clone()) {
            bail!(
                "optimizer label `{}` appears twice; set an explicit `label`",
                labeled.label
            );
        }
        optimizers.push(labeled);
    }

    let alpha_grid = match config.sweep.as_ref().and_then(|s| s.alphas.as_ref()) {
        None | Some(AlphaGrid::Preset(_)) => {
            if let Some(AlphaGrid::Preset(name)) =
                config.sweep.as_ref().and_then(|s| s.alphas.as_ref())
            {
                if name != "preset" {
                    bail!("unknown alpha grid preset `{name}` (only `preset` is defined)");
                }
            }
            PRESET_ALPHA_GRID.to_vec()
        }
        Some(AlphaGrid::Explicit(v)) => {
            if v.is_empty() {
                bail!("sweep.alphas must not be empty");
            }
            if v.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                bail!("sweep.alphas must be positive and finite");
            }
            v.clone()
        }
    };

    Ok(Experiment {
        problem,
        optimizers,
        seeds,
        iters,
        record_every,
        workers,
        w1,
        alpha_grid,
    })
}

fn resolve_iters(run: &RunConfig) -> Result<u64> {
    let from_epochs = run.epochs.map(|e| {
        let bpe = run.batches_per_epoch.unwrap_or(DEFAULT_BATCHES_PER_EPOCH);
        (e * bpe, bpe)
    });
    match (run.iters, from_epochs) {
        (Some(iters), Some((computed, bpe))) => {
            if iters != computed {
                bail!(
                    "run.iters = {iters} conflicts with epochs × batches_per_epoch = {} × {bpe}",
                    run.epochs.unwrap()
                );
            }
            Ok(iters)
        }
        (Some(iters), None) => Ok(iters),
        (None, Some((computed, _))) => Ok(computed),
        (None, None) => bail!("one of run.iters or run.epochs is required"),
    }
    .and_then(|v| {
        if v == 0 {
            bail!("the run must have at least one iteration")
        } else {
            Ok(v)
        }
    })
}

fn resolve_start(start: Option<&StartConfig>, problem: &dyn Problem) -> Result<Vec<f64>> {
    let d = problem.dim();
    match start {
        None => Ok(default_start(d)),
        Some(StartConfig::Explicit(v)) => {
            if v.len() != d {
                bail!("run.w1 has dimension {}, problem expects {d}", v.len());
            }
            Ok(v.clone())
        }
        Some(StartConfig::Shaped {
            norm,
            offset_from_minimizer,
        }) => match (norm, offset_from_minimizer) {
            (Some(r), None) => {
                if !(r.is_finite() && *r >= 0.0) {
                    bail!("run.w1.norm must be non-negative");
                }
                Ok(vec![r / (d as f64).sqrt(); d])
            }
            (None, Some(eps)) => {
                let w_star = problem.constants().minimizer.clone().ok_or_else(|| {
                    anyhow!("run.w1.offset_from_minimizer needs a problem with a known minimizer")
                })?;
                let per = eps / (d as f64).sqrt();
                Ok(w_star.iter().map(|v| v + per).collect())
            }
            _ => bail!("run.w1 needs exactly one of `norm` or `offset_from_minimizer`"),
        },
    }
}

fn build_problem(pc: &ProblemConfig) -> Result<Box<dyn Problem>> {
    let data_seed = pc.data_seed.unwrap_or(0);
    let noise = pc.noise.unwrap_or(0.0);
    if !(noise.is_finite() && noise >= 0.0) {
        bail!("problem.noise must be non-negative");
    }
    let reject = |field: &str, used: bool| -> Result<()> {
        if used {
            bail!("problem.{field} does not apply to `{}`", pc.name);
        }
        Ok(())
    };
    match pc.name.as_str() {
        "quartic" => {
            reject("dim", pc.dim.is_some())?;
            reject("noise", pc.noise.is_some())?;
            Ok(Box::new(problems::quartic()))
        }
        "appendix_e" => {
            reject("dim", pc.dim.is_some())?;
            reject("noise", pc.noise.is_some())?;
            Ok(Box::new(minibatch_quadratic(data_seed)))
        }
        "stiff_diag" => {
            let lo = pc.lambda_min.ok_or_else(|| anyhow!("stiff_diag needs problem.lambda_min"))?;
            let hi = pc.lambda_max.ok_or_else(|| anyhow!("stiff_diag needs problem.lambda_max"))?;
            let d = pc.dim.ok_or_else(|| anyhow!("stiff_diag needs problem.dim"))?;
            if !(lo > 0.0 && lo <= hi) {
                bail!("stiff_diag needs 0 < lambda_min <= lambda_max");
            }
            Ok(Box::new(stiff_diag_quadratic(lo, hi, d, noise)))
        }
        "sc_quadratic" => {
            let c = pc.convexity.ok_or_else(|| anyhow!("sc_quadratic needs problem.convexity"))?;
            let l = pc.lipschitz.ok_or_else(|| anyhow!("sc_quadratic needs problem.lipschitz"))?;
            let d = pc.dim.ok_or_else(|| anyhow!("sc_quadratic needs problem.dim"))?;
            if !(c > 0.0 && c <= l) {
                bail!("sc_quadratic needs 0 < convexity <= lipschitz");
            }
            Ok(Box::new(strongly_convex_quadratic(c, l, d, noise)))
        }
        "nonconvex" => {
            let d = pc.dim.ok_or_else(|| anyhow!("nonconvex needs problem.dim"))?;
            match pc.amplitude {
                None => Ok(Box::new(nonconvex_smooth(d, noise))),
                Some(a) => Ok(Box::new(problems::NonconvexSmooth::with_amplitude(d, a, noise))),
            }
        }
        "logreg" => {
            let n = pc.n_samples.ok_or_else(|| anyhow!("logreg needs problem.n_samples"))?;
            let d = pc.dim.ok_or_else(|| anyhow!("logreg needs problem.dim"))?;
            let separable = pc.separable.unwrap_or(true);
            reject("noise", pc.noise.is_some())?;
            Ok(Box::new(logistic_regression(n, d, separable, data_seed)))
        }
        other => bail!(
            "unknown problem `{other}` (expected quartic, appendix_e, stiff_diag, sc_quadratic, nonconvex or logreg)"
        ),
    }
}

fn build_optimizer(oc: &OptimizerConfig, iters: u64) -> Result<LabeledOptimizer> {
    let method = match oc.method.as_str() {
        "softclip_cw" => {
            let scheme_name = oc.scheme.as_deref().unwrap_or("tamed");
            let scheme = ClipScheme::by_name(scheme_name, oc.gamma)
                .map_err(|e| anyhow!(e.to_string()))?;
            Method::SoftClipCw { scheme }
        }
        "softclip_norm" => Method::SoftClipNorm {
            gamma: positive(oc.gamma.unwrap_or(optim::DEFAULT_NORM_CLIP_GAMMA), "gamma")?,
        },
        "sgd" => Method::Sgd,
        "sgd_momentum" => Method::SgdMomentum {
            mu: positive(oc.mu.unwrap_or(optim::DEFAULT_MOMENTUM), "mu")?,
        },
        "hard_clip" => Method::HardClip {
            gamma_c: positive(oc.gamma_c.unwrap_or(optim::DEFAULT_HARD_CLIP_RADIUS), "gamma_c")?,
        },
        "adam" => Method::Adam {
            beta1: oc.beta1.unwrap_or(optim::DEFAULT_ADAM_BETA1),
            beta2: oc.beta2.unwrap_or(optim::DEFAULT_ADAM_BETA2),
            epsilon: positive(oc.epsilon.unwrap_or(optim::DEFAULT_ADAM_EPSILON), "epsilon")?,
        },
        other => bail!(
            "unknown method `{other}` (expected softclip_cw, softclip_norm, sgd, sgd_momentum, hard_clip or adam)"
        ),
    };

    let schedule = match &oc.schedule {
        Some(sc) => {
            let horizon = match sc.kind.as_str() {
                // Horizon kinds default to the run length.
                "horizon-sqrt" | "horizon-inverse" => sc.horizon.or(Some(iters)),
                _ => sc.horizon,
            };
            StepSchedule::from_parts(&sc.kind, sc.beta, sc.gamma, horizon)
                .map_err(|e| anyhow!(e.to_string()))?
        }
        // A sweep replaces the schedule per grid point anyway.
        None => StepSchedule::Constant { beta: 1.0 },
    };

    let label = oc.label.clone().unwrap_or_else(|| default_label(&method));
    Ok(LabeledOptimizer {
        label,
        spec: OptimizerSpec { method, schedule },
    })
}

fn positive(v: f64, name: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        bail!("{name} must be positive and finite, got {v}")
    }
}

fn default_label(method: &Method) -> String {
    match method {
        Method::SoftClipCw { scheme } => format!("softclip_cw_{}", scheme.name()),
        other => other.name().to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [problem]
        name = "stiff_diag"
        lambda_min = 0.1
        lambda_max = 10.0
        dim = 4

        [run]
        iters = 10

        [[optimizer]]
        method = "sgd"
        schedule = { kind = "constant", beta = 0.01 }
    "#;

    #[test]
    fn minimal_config_resolves() {
        let cfg = Config::from_toml_str(MINIMAL, &[]).unwrap();
        let exp = resolve(&cfg).unwrap();
        assert_eq!(exp.seeds, DEFAULT_SEEDS.to_vec());
        assert_eq!(exp.iters, 10);
        assert_eq!(exp.optimizers[0].label, "sgd");
        assert_eq!(exp.w1.len(), 4);
        let norm: f64 = exp.w1.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 10.0).abs() < 1e-12);
    }

    #[test]
    fn overrides_edit_the_tree() {
        let cfg = Config::from_toml_str(
            MINIMAL,
            &[
                "run.iters=20".into(),
                "problem.noise=0.5".into(),
                "optimizer.0.schedule.beta=0.25".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.run.iters, Some(20));
        assert_eq!(cfg.problem.noise, Some(0.5));
        let exp = resolve(&cfg).unwrap();
        assert_eq!(
            exp.optimizers[0].spec.schedule,
            StepSchedule::Constant { beta: 0.25 }
        );
    }

    #[test]
    fn unknown_names_fail_fast() {
        let bad = MINIMAL.replace("\"sgd\"", "\"sgdx\"");
        let cfg = Config::from_toml_str(&bad, &[]).unwrap();
        assert!(resolve(&cfg).unwrap_err().to_string().contains("sgdx"));

        let bad = MINIMAL.replace("\"stiff_diag\"", "\"banana\"");
        let cfg = Config::from_toml_str(&bad, &[]).unwrap();
        assert!(resolve(&cfg).unwrap_err().to_string().contains("banana"));

        let cfg = Config::from_toml_str(MINIMAL, &["run.seeds=[1, 1]".into()]).unwrap();
        assert!(resolve(&cfg)
            .unwrap_err()
            .to_string()
            .contains("duplicates"));
    }

    #[test]
    fn epoch_accounting_is_consistent() {
        let cfg = Config::from_toml_str(MINIMAL, &["run.epochs=15".into(), "run.iters=480".into()])
            .unwrap();
        let exp = resolve(&cfg).unwrap();
        assert_eq!(exp.iters, 480);

        let cfg = Config::from_toml_str(MINIMAL, &["run.epochs=15".into(), "run.iters=100".into()])
            .unwrap();
        assert!(resolve(&cfg).unwrap_err().to_string().contains("conflicts"));
    }

    #[test]
    fn horizon_schedules_inherit_the_run_length() {
        let cfg = Config::from_toml_str(
            MINIMAL,
            &[
                "run.iters=400".into(),
                "optimizer.0.schedule={ kind = \"horizon-sqrt\" }".into(),
            ],
        )
        .unwrap();
        let exp = resolve(&cfg).unwrap();
        assert_eq!(exp.optimizers[0].spec.schedule.alpha_at(1), 0.05);
    }

    #[test]
    fn softclip_scheme_labels_are_distinct() {
        let extra = format!(
            "{MINIMAL}\n[[optimizer]]\nmethod = \"softclip_cw\"\nscheme = \"arctan\"\nschedule = {{ kind = \"constant\", beta = 0.1 }}\n"
        );
        let cfg = Config::from_toml_str(&extra, &[]).unwrap();
        let exp = resolve(&cfg).unwrap();
        assert_eq!(exp.optimizers[1].label, "softclip_cw_arctan");
    }
}
