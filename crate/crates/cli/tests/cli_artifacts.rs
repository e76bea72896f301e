//! Artifact-level behavior of the harness: config echo round-trips, the
//! identity scheme reproduces SGD byte-for-byte, and configuration errors
//! name the offending piece.

use std::fs;
use std::path::Path;

use softclip_cli::config::Config;
use softclip_cli::verify::cmd_verify;
use softclip_cli::{cmd_run, cmd_sweep};

const BASE: &str = r#"
    [problem]
    name = "stiff_diag"
    lambda_min = 0.1
    lambda_max = 100.0
    dim = 8
    noise = 0.5

    [run]
    iters = 120
    seeds = [0, 1]
    record_every = 10

    [[optimizer]]
    method = "sgd"
    schedule = { kind = "inverse-linear", beta = 0.005, gamma = 1.0 }
"#;

fn with_out(base: &str, out: &Path, extra: &[&str]) -> Config {
    let mut overrides = vec![format!("run.out=\"{}\"", out.display())];
    overrides.extend(extra.iter().map(|s| s.to_string()));
    Config::from_toml_str(base, &overrides).unwrap()
}

#[test]
fn identity_scheme_artifacts_match_sgd_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let sgd_out = dir.path().join("sgd");
    let id_out = dir.path().join("identity");

    let sgd_cfg = with_out(BASE, &sgd_out, &[]);
    cmd_run(&sgd_cfg).unwrap();

    let identity = BASE.replace(
        "method = \"sgd\"",
        "method = \"softclip_cw\"\nscheme = \"identity\"\nlabel = \"sgd\"",
    );
    let id_cfg = with_out(&identity, &id_out, &[]);
    cmd_run(&id_cfg).unwrap();

    // Trace CSVs carry no method names: identical bytes required.
    for seed in [0, 1] {
        let a = fs::read(sgd_out.join(format!("runs/sgd/{seed}.csv"))).unwrap();
        let b = fs::read(id_out.join(format!("runs/sgd/{seed}.csv"))).unwrap();
        assert_eq!(a, b, "trace for seed {seed} differs");
    }

    // Summaries agree except for the method description fields.
    let strip = |path: &Path| -> serde_json::Value {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        for run in v["runs"].as_array_mut().unwrap() {
            run.as_object_mut().unwrap().remove("method");
        }
        v
    };
    assert_eq!(
        strip(&sgd_out.join("summary.json")),
        strip(&id_out.join("summary.json"))
    );
}

#[test]
fn rerunning_the_echoed_config_reproduces_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    cmd_run(&with_out(BASE, &first, &[])).unwrap();

    let echo = fs::read_to_string(first.join("config.echo.toml")).unwrap();
    let second = dir.path().join("second");
    let cfg2 =
        Config::from_toml_str(&echo, &[format!("run.out=\"{}\"", second.display())]).unwrap();
    cmd_run(&cfg2).unwrap();

    let walk = |root: &Path| -> Vec<(String, Vec<u8>)> {
        let mut files = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            let mut entries: Vec<_> = fs::read_dir(&dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            entries.sort();
            for p in entries {
                if p.is_dir() {
                    stack.push(p);
                } else {
                    files.push((
                        p.strip_prefix(root).unwrap().to_string_lossy().into_owned(),
                        fs::read(&p).unwrap(),
                    ));
                }
            }
        }
        files.sort();
        files
    };
    assert_eq!(walk(&first), walk(&second));
}

#[test]
fn quartic_divergence_is_recorded_not_fatal() {
    let quartic_cfg = r#"
        [problem]
        name = "quartic"

        [run]
        iters = 480
        seeds = [0]
        w1 = [2.0]

        [[optimizer]]
        method = "sgd"
        schedule = { kind = "inverse-linear", beta = 1.0, gamma = 0.0 }
    "#;
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let summary = cmd_run(&with_out(quartic_cfg, &out, &[])).unwrap();
    let entry = &summary.runs[0];
    assert!(entry.diverged);
    assert!(entry.diverged_at.is_some());
    assert!(
        entry.final_f.is_none(),
        "no final metrics for diverged runs"
    );

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["runs"][0]["diverged"], serde_json::json!(true));
}

#[test]
fn sweep_artifacts_have_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = with_out(BASE, &out, &["sweep.alphas=[1e-3, 1e-2]", "run.iters=50"]);
    let summary = cmd_sweep(&cfg).unwrap();
    assert_eq!(summary.rows.len(), 2 * 2); // 1 method × 2 alphas × 2 seeds

    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(sweep.starts_with("method,alpha,seed,final_error,diverged\n"));
    assert_eq!(sweep.lines().count(), 1 + 4);

    let mean = fs::read_to_string(out.join("sweep_mean.csv")).unwrap();
    assert!(mean.starts_with("method,alpha,mean_final_error,diverged_count,n_seeds\n"));
    assert_eq!(mean.lines().count(), 1 + 2);
    for line in mean.lines().skip(1) {
        assert!(line.ends_with(",0,2"), "no diverged seeds expected: {line}");
    }
}

#[test]
fn verify_report_includes_stated_and_tight_bound_forms() {
    let cfg_text = r#"
        [problem]
        name = "sc_quadratic"
        convexity = 1.0
        lipschitz = 10.0
        dim = 6
        noise = 0.05

        [run]
        iters = 400
        seeds = [0, 1, 2]

        [[optimizer]]
        method = "softclip_cw"
        scheme = "tamed"
        schedule = { kind = "inverse-linear", beta = 0.75, gamma = 1.0 }

        [verify]
        checks = ["min_grad_bound"]
    "#;
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let report = cmd_verify(&with_out(cfg_text, &out, &[])).unwrap();
    assert!(!report.any_fail);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let checkpoints = json["checks"]["min_grad_bound"]["details"]["checkpoints"]
        .as_array()
        .unwrap();
    for cp in checkpoints {
        let stated = cp["bound_stated"].as_f64().unwrap();
        let tight = cp["bound_tight"].as_f64().unwrap();
        let exact = cp["bound_exact_sums"].as_f64().unwrap();
        assert!(
            tight <= stated,
            "tight form must not exceed the stated form"
        );
        assert!(
            exact <= stated * (1.0 + 1e-9),
            "stated form dominates exact sums"
        );
    }
}

#[test]
fn full_verify_passes_on_the_strongly_convex_quadratic() {
    let cfg_text = r#"
        [problem]
        name = "sc_quadratic"
        convexity = 1.0
        lipschitz = 10.0
        dim = 10
        noise = 0.05

        [run]
        iters = 2000
        seeds = [0, 1, 2, 3, 4]
        record_every = 10

        [[optimizer]]
        method = "softclip_cw"
        scheme = "tamed"
        schedule = { kind = "inverse-linear", beta = 0.75, gamma = 1.0 }

        [verify]
        checks = ["descent", "min_grad_bound", "sc_gap_bound", "as_convergence", "moments", "gd_bounds"]
        epsilon = 1e-2
    "#;
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let report = cmd_verify(&with_out(cfg_text, &out, &[])).unwrap();
    assert!(!report.any_fail, "checks: {:?}", report.checks.keys());
    assert_eq!(report.checks.len(), 6);
    for (name, result) in &report.checks {
        assert_eq!(
            format!("{:?}", result.status),
            "Pass",
            "check {name} did not pass"
        );
    }
    assert!(out.join("verify.json").exists());

    // The key-value rendering carries one scalar per line.
    let kv = fs::read_to_string(out.join("verify.txt")).unwrap();
    assert!(kv.contains("any_fail = false"));
    assert!(kv.contains("descent.status = pass"));
    assert!(kv.lines().all(|l| l.contains(" = ")));

    // Per-k / per-K / per-seed tables, one CSV per check.
    let header = |name: &str| {
        fs::read_to_string(out.join(format!("verify/{name}.csv")))
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(header("descent"), "point,lhs,rhs,stderr,margin,passed");
    assert_eq!(
        header("min_grad_bound"),
        "k,lhs_min_mean_grad_sq,lhs_argmin_k,stderr,bound_exact_sums,bound_stated,bound_tight,status"
    );
    assert_eq!(header("sc_gap_bound"), "k,mean_gap,stderr,bound,status");
    assert_eq!(header("as_convergence"), "seed,zeta_final,monotone");
    assert_eq!(
        header("moments"),
        "k,mean_dist,mean_dist_sq,mean_dist_cubed"
    );
    assert_eq!(
        header("gd_bounds"),
        "strategy,hypothesis_holds,bound,tightness"
    );
}

#[test]
fn interpolation_checks_on_noisy_problems_name_the_constant() {
    let cfg_text = r#"
        [problem]
        name = "sc_quadratic"
        convexity = 1.0
        lipschitz = 10.0
        dim = 6
        noise = 0.05

        [run]
        iters = 100
        seeds = [0, 1]

        [[optimizer]]
        method = "softclip_cw"
        scheme = "tamed"
        schedule = { kind = "inverse-linear", beta = 0.75, gamma = 1.0 }

        [verify]
        checks = ["min_grad_bound"]
        use_interpolation = true
    "#;
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let err = cmd_verify(&with_out(cfg_text, &out, &[])).unwrap_err();
    assert!(
        err.to_string().contains("interpolation"),
        "error should name the missing hypothesis: {err}"
    );
}

#[test]
fn validation_failures_precede_any_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let bad_method = BASE.replace("\"sgd\"", "\"sgdX\"");
    let err = cmd_run(&with_out(&bad_method, &out, &[])).unwrap_err();
    assert!(err.to_string().contains("sgdX"));
    assert!(
        !out.exists(),
        "nothing may be written on validation failure"
    );

    let bad_schedule = BASE.replace("kind = \"inverse-linear\"", "kind = \"horizon-sqrt\"");
    // horizon-sqrt inherits the horizon from run.iters, so this still works;
    // removing iters must fail instead.
    let cfg = with_out(&bad_schedule, &out, &[]);
    cmd_run(&cfg).unwrap();
    assert!(out.exists());
}

#[test]
fn catalogue_lists_exact_config_names() {
    let text = softclip_cli::catalogue_text();
    for name in ["tamed", "arctan", "log", "sin", "identity"] {
        assert!(text.contains(name));
    }
    for name in [
        "softclip_cw",
        "softclip_norm",
        "sgd",
        "sgd_momentum",
        "hard_clip",
        "adam",
    ] {
        assert!(text.contains(name));
    }
    for name in [
        "quartic",
        "appendix_e",
        "stiff_diag",
        "sc_quadratic",
        "nonconvex",
        "logreg",
    ] {
        assert!(text.contains(name));
    }
}
