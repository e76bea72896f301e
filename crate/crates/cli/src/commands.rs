//! The `run`, `sweep` and `list` commands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use softclip_core::clip;
use softclip_core::optim::{run, OptimizerSpec};
use softclip_core::problems::Problem;
use softclip_core::record::format_float;
use softclip_core::schedule::StepSchedule;
use softclip_core::RunRecord;

use crate::artifacts::{format_opt, write_json, write_text};
use crate::config::{resolve, Config, Experiment, PRESET_ALPHA_GRID};

pub fn out_dir(config: &Config) -> PathBuf {
    PathBuf::from(config.run.out.clone().unwrap_or_else(|| "out".to_string()))
}

fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("cannot build worker pool")?;
    Ok(pool.install(f))
}

fn echo_config(config: &Config, exp: &Experiment, out: &Path) -> Result<()> {
    let effective = config.effective(exp);
    write_text(&out.join("config.echo.toml"), &effective.to_toml_string()?)
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub iters: u64,
    pub record_every: u64,
    pub runs: Vec<RunEntry>,
}

#[derive(Debug, Serialize)]
pub struct RunEntry {
    pub label: String,
    pub method: String,
    pub schedule: String,
    pub seed: u64,
    pub diverged: bool,
    pub diverged_at: Option<u64>,
    /// Final metrics are omitted for diverged runs.
    pub final_f: Option<f64>,
    pub final_grad_norm_sq: Option<f64>,
    pub final_error: Option<f64>,
    pub trace: String,
}

/// Execute every (optimizer × seed) run, write one trace CSV per run plus a
/// JSON summary, and echo the effective configuration.
pub fn cmd_run(config: &Config) -> Result<RunSummary> {
    let exp = resolve(config)?;
    let out = out_dir(config);
    echo_config(config, &exp, &out)?;

    let mut tasks: Vec<(usize, u64)> = Vec::new();
    for i in 0..exp.optimizers.len() {
        for &seed in &exp.seeds {
            tasks.push((i, seed));
        }
    }

    let records: Vec<RunRecord> = with_pool(exp.workers, || {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|&(i, seed)| {
                run(
                    &exp.optimizers[i].spec,
                    exp.problem.as_ref(),
                    &exp.w1,
                    seed,
                    exp.iters,
                    exp.record_every,
                )
            })
            .collect::<Result<Vec<_>, _>>()
    })??;

    let mut entries = Vec::new();
    for (&(i, seed), record) in tasks.iter().zip(&records) {
        let label = &exp.optimizers[i].label;
        let rel = format!("runs/{label}/{seed}.csv");
        write_text(&out.join(&rel), &record.to_csv())?;
        entries.push(run_entry(label, record, exp.problem.as_ref(), seed, rel));
    }

    let summary = RunSummary {
        problem: exp.problem.name().to_string(),
        iters: exp.iters,
        record_every: exp.record_every,
        runs: entries,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}

fn run_entry(
    label: &str,
    record: &RunRecord,
    problem: &dyn Problem,
    seed: u64,
    trace: String,
) -> RunEntry {
    let diverged = record.diverged();
    let (final_f, final_gsq, final_error) = if diverged {
        (None, None, None)
    } else {
        let f = problem.value(&record.final_w);
        let gsq: f64 = problem
            .full_grad(&record.final_w)
            .iter()
            .map(|g| g * g)
            .sum();
        let err = problem
            .constants()
            .minimizer
            .as_ref()
            .map(|ws| record.final_error(ws));
        (Some(f), Some(gsq), err)
    };
    RunEntry {
        label: label.to_string(),
        method: record.meta.method.clone(),
        schedule: record.meta.schedule.clone(),
        seed,
        diverged,
        diverged_at: record.meta.diverged_at,
        final_f,
        final_grad_norm_sq: final_gsq,
        final_error,
        trace,
    }
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub problem: String,
    pub iters: u64,
    pub alphas: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub alpha: f64,
    pub seed: u64,
    /// Distance of the final iterate to the minimizer; absent when diverged.
    pub final_error: Option<f64>,
    pub diverged: bool,
}

/// Run every optimizer over the step-size grid with a constant schedule and
/// emit the final-error table plus its seed-averaged companion.
pub fn cmd_sweep(config: &Config) -> Result<SweepSummary> {
    let exp = resolve(config)?;
    let out = out_dir(config);
    let w_star = exp
        .problem
        .constants()
        .minimizer
        .clone()
        .ok_or_else(|| anyhow::anyhow!("sweep needs a problem with a known minimizer"))?;
    echo_config(config, &exp, &out)?;

    let mut tasks: Vec<(usize, usize, u64)> = Vec::new();
    for i in 0..exp.optimizers.len() {
        for a in 0..exp.alpha_grid.len() {
            for &seed in &exp.seeds {
                tasks.push((i, a, seed));
            }
        }
    }

    let rows: Vec<SweepRow> = with_pool(exp.workers, || {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|&(i, a, seed)| {
                let alpha = exp.alpha_grid[a];
                let spec = OptimizerSpec {
                    method: exp.optimizers[i].spec.method.clone(),
                    schedule: StepSchedule::Constant { beta: alpha },
                };
                // Traces are not kept for sweeps; only endpoints matter.
                let record = run(
                    &spec,
                    exp.problem.as_ref(),
                    &exp.w1,
                    seed,
                    exp.iters,
                    exp.iters,
                )?;
                let diverged = record.diverged();
                Ok(SweepRow {
                    label: exp.optimizers[i].label.clone(),
                    alpha,
                    seed,
                    final_error: (!diverged).then(|| record.final_error(&w_star)),
                    diverged,
                })
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let mut csv = String::from("method,alpha,seed,final_error,diverged\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.label,
            format_float(r.alpha),
            r.seed,
            format_opt(r.final_error),
            r.diverged
        ));
    }
    write_text(&out.join("sweep.csv"), &csv)?;

    // Seed-averaged curves, one row per (method, alpha); averages run over
    // the non-diverged seeds only and the diverged count is carried along.
    let mut mean_csv = String::from("method,alpha,mean_final_error,diverged_count,n_seeds\n");
    for opt in &exp.optimizers {
        for &alpha in &exp.alpha_grid {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.label == opt.label && r.alpha == alpha)
                .collect();
            let diverged_count = group.iter().filter(|r| r.diverged).count();
            let survivors: Vec<f64> = group.iter().filter_map(|r| r.final_error).collect();
            let mean = if survivors.is_empty() {
                None
            } else {
                Some(survivors.iter().sum::<f64>() / survivors.len() as f64)
            };
            mean_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                opt.label,
                format_float(alpha),
                format_opt(mean),
                diverged_count,
                group.len()
            ));
        }
    }
    write_text(&out.join("sweep_mean.csv"), &mean_csv)?;

    let summary = SweepSummary {
        problem: exp.problem.name().to_string(),
        iters: exp.iters,
        alphas: exp.alpha_grid.clone(),
        rows,
    };
    write_json(&out.join("sweep_summary.json"), &summary)?;
    Ok(summary)
}

/// The catalogue listing shown by `softclip list`.
pub fn catalogue_text() -> String {
    let mut s = String::new();
    s.push_str("clip schemes (softclip_cw `scheme`):\n");
    for scheme in clip::catalogue() {
        s.push_str(&format!(
            "  {:<9} c_g = {}, c_h = {}{}\n",
            scheme.name(),
            scheme.c_g(),
            scheme.c_h(),
            if scheme.name() == "tamed" {
                format!(" (gamma = {}, configurable)", scheme.gamma())
            } else {
                String::new()
            }
        ));
    }
    s.push_str("\nmethods:\n");
    s.push_str("  softclip_cw    component-wise soft clipping (scheme, gamma)\n");
    s.push_str("  softclip_norm  gradient-norm soft clipping (gamma, default 1)\n");
    s.push_str("  sgd            plain stochastic gradient descent\n");
    s.push_str("  sgd_momentum   heavy-ball momentum (mu, default 0.9)\n");
    s.push_str("  hard_clip      step projection onto a ball (gamma_c, default 1)\n");
    s.push_str("  adam           adaptive moments (beta1 0.9, beta2 0.999, epsilon 1e-7)\n");
    s.push_str("\nproblems:\n");
    s.push_str("  quartic        scalar w^4/4, deterministic gradient\n");
    s.push_str(
        "  appendix_e     minibatch quadratic over 1000 sampled feature vectors (data_seed)\n",
    );
    s.push_str("  stiff_diag     diagonal quadratic, log-spaced spectrum (lambda_min, lambda_max, dim, noise)\n");
    s.push_str(
        "  sc_quadratic   strongly convex diagonal quadratic (convexity, lipschitz, dim, noise)\n",
    );
    s.push_str("  nonconvex      separable cosine-perturbed quadratic (dim, noise, amplitude)\n");
    s.push_str(
        "  logreg         ridge logistic regression (n_samples, dim, separable, data_seed)\n",
    );
    s.push_str("\nschedules:\n");
    s.push_str("  inverse-linear beta/(k+gamma)\n");
    s.push_str("  constant       beta\n");
    s.push_str("  horizon-sqrt   1/sqrt(K), K defaults to run.iters\n");
    s.push_str("  horizon-inverse 1/K\n");
    s.push_str("  training-decay beta/(1+1e-4 k)\n");
    s.push_str(&format!(
        "\nsweep preset alpha grid: {:?}\n",
        PRESET_ALPHA_GRID
    ));
    s
}

/// Validate that a user-provided label is safe as a path component.
pub fn validate_label(label: &str) -> Result<()> {
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
    {
        bail!("label `{label}` must be non-empty and use only [A-Za-z0-9_.-]");
    }
    Ok(())
}
