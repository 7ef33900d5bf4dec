//! Subcommand bodies. Each one validates its flags, calls into `hsic_core`
//! and assembles the JSON report; no statistic is computed here.

use std::time::Instant;

use serde_json::{json, Value};

use hsic_core::sweep::oracle_sweep;
use hsic_core::testing::{permutation_test, power_experiment, PERMUTATION_RNG};
use hsic_core::{Error, GeneratorSpec, KernelSpec, PermutationConfig};

use crate::input::{load_dataset, parse_columns};
use crate::{PermutationArgs, RingArgs, SweepArgs, TestArgs};

/// Upper bound on the number of grid distributions a sweep may visit.
const MAX_SWEEP_DISTRIBUTIONS: f64 = 5e6;

pub const VERSION: &str = concat!("hsic ", env!("CARGO_PKG_VERSION"));

#[derive(Debug)]
pub enum CommandError {
    Input(String),
    Numerical(String),
}

impl From<Error> for CommandError {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(m) => CommandError::Numerical(m),
            other => CommandError::Input(other.to_string()),
        }
    }
}

fn kernel(flag: &str, spec: &str) -> Result<KernelSpec<f64>, CommandError> {
    spec.parse()
        .map_err(|e: Error| CommandError::Input(format!("{flag}: {e}")))
}

fn permutation_config(p: &PermutationArgs) -> Result<PermutationConfig, CommandError> {
    Ok(PermutationConfig::new(p.permutations, p.alpha, p.seed)?)
}

fn permutation_flags(p: &PermutationArgs) -> Vec<String> {
    vec![
        "--permutations".into(),
        p.permutations.to_string(),
        "--alpha".into(),
        p.alpha.to_string(),
        "--seed".into(),
        p.seed.to_string(),
    ]
}

pub fn run_test(args: &TestArgs, threads: usize) -> Result<Value, CommandError> {
    let start = Instant::now();
    let kx = kernel("--kernel-x", &args.kernel_x)?;
    let ky = kernel("--kernel-y", &args.kernel_y)?;
    let cfg = permutation_config(&args.perm)?;
    let x_columns = parse_columns(&args.x_columns);
    let y_columns = parse_columns(&args.y_columns);
    let data = load_dataset(&args.csv, &x_columns, &y_columns)
        .map_err(|e| CommandError::Input(e.to_string()))?;

    let mut warnings = Vec::new();
    if data.len() == 2 {
        let w = "n = 2 gives a vacuous permutation null (only 2 permutations)";
        eprintln!("warning: {w}");
        warnings.push(w);
    }

    let result = permutation_test(&data, &kx, &ky, &cfg)?;
    eprintln!(
        "HSIC = {:.6e}, p = {:.4}, {} at alpha = {} (n = {}, B = {})",
        result.statistic.value,
        result.p_value,
        if result.reject {
            "reject independence"
        } else {
            "do not reject"
        },
        cfg.alpha,
        data.len(),
        cfg.num_permutations
    );

    let mut rerun = vec![
        "test".to_string(),
        args.csv.display().to_string(),
        "--x-columns".into(),
        x_columns.join(","),
        "--y-columns".into(),
        y_columns.join(","),
        "--kernel-x".into(),
        kx.to_string(),
        "--kernel-y".into(),
        ky.to_string(),
    ];
    rerun.extend(permutation_flags(&args.perm));

    Ok(json!({
        "command": "test",
        "version": VERSION,
        "parameters": {
            "csv": args.csv.display().to_string(),
            "x_columns": x_columns,
            "y_columns": y_columns,
            "kernel_x": kx.to_string(),
            "kernel_y": ky.to_string(),
            "permutations": cfg.num_permutations,
            "alpha": cfg.alpha,
            "seed": cfg.seed,
            "threads": threads,
        },
        "rerun": rerun,
        "n": data.len(),
        "statistic": result.statistic.value,
        "statistic_raw": result.statistic.raw,
        "p_value": result.p_value,
        "reject": result.reject,
        "null_quantile": result.null_quantile,
        "num_permutations": result.num_permutations,
        "seed": result.seed,
        "rng": result.rng,
        "resolved_bandwidth_x": result.resolved_bandwidth_x,
        "resolved_bandwidth_y": result.resolved_bandwidth_y,
        "warnings": warnings,
        "duration_seconds": start.elapsed().as_secs_f64(),
    }))
}

pub fn run_reproduce_ring(args: &RingArgs, threads: usize) -> Result<Value, CommandError> {
    let start = Instant::now();
    let cfg = permutation_config(&args.perm)?;
    if args.n < 2 {
        return Err(CommandError::Input("--n must be at least 2".into()));
    }
    let generator = GeneratorSpec::<f64>::ring(args.radius, args.noise, cfg.seed);
    generator.validate()?;

    let kx = KernelSpec::gaussian_median();
    let configurations = [
        ("non-characteristic on Y", KernelSpec::linear()),
        ("characteristic on both", KernelSpec::gaussian_median()),
    ];
    let mut rows = Vec::new();
    for (label, ky) in configurations {
        let power = power_experiment(&generator, &kx, &ky, &cfg, args.trials, args.n)?;
        eprintln!(
            "{label:<24} kernel_x = {kx}, kernel_y = {ky}: rejection rate {:.3} over {} trials",
            power.rejection_rate, power.trials
        );
        rows.push(json!({
            "label": label,
            "kernel_x": kx.to_string(),
            "kernel_y": ky.to_string(),
            "rejection_rate": power.rejection_rate,
            "trials": power.trials,
            "per_trial_p_values": power.per_trial_p_values,
        }));
    }

    let mut rerun = vec![
        "reproduce-ring".to_string(),
        "--n".into(),
        args.n.to_string(),
        "--trials".into(),
        args.trials.to_string(),
        "--radius".into(),
        args.radius.to_string(),
        "--noise".into(),
        args.noise.to_string(),
    ];
    rerun.extend(permutation_flags(&args.perm));

    Ok(json!({
        "command": "reproduce-ring",
        "version": VERSION,
        "parameters": {
            "n": args.n,
            "trials": args.trials,
            "radius": args.radius,
            "noise": args.noise,
            "permutations": cfg.num_permutations,
            "alpha": cfg.alpha,
            "seed": cfg.seed,
            "threads": threads,
            "rng": PERMUTATION_RNG,
        },
        "rerun": rerun,
        "configurations": rows,
        "duration_seconds": start.elapsed().as_secs_f64(),
    }))
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn run_oracle_sweep(args: &SweepArgs, threads: usize) -> Result<Value, CommandError> {
    let start = Instant::now();
    let default_kernel = match args.family.as_deref() {
        None => "gaussian:1".to_string(),
        Some(f) => {
            let spec = kernel("--family", f)?;
            if spec.is_resolved() || f.contains(':') {
                spec.to_string()
            } else {
                format!("{}:1", spec.family())
            }
        }
    };
    let kx = kernel(
        "--kernel-x",
        args.kernel_x.as_deref().unwrap_or(&default_kernel),
    )?;
    let ky = kernel(
        "--kernel-y",
        args.kernel_y.as_deref().unwrap_or(&default_kernel),
    )?;

    let cells = args.m_x * args.m_y;
    if cells > 0 && args.resolution >= 2 {
        let count = binomial(args.resolution + cells - 1, cells - 1);
        if count > MAX_SWEEP_DISTRIBUTIONS {
            return Err(CommandError::Input(format!(
                "grid has {count} distributions, more than the limit of {MAX_SWEEP_DISTRIBUTIONS}; lower --resolution"
            )));
        }
    }

    let summary = oracle_sweep(args.m_x, args.m_y, args.resolution, &kx, &ky)?;
    let status = match summary.pass {
        Some(true) => "PASS",
        Some(false) => "FAIL",
        None => "COUNTEREXAMPLES_REPORTED",
    };
    eprintln!(
        "{status}: {} distributions ({} dependent), min dependent HSIC {:?}, max independent HSIC {:?}, {} counterexamples",
        summary.total,
        summary.dependent,
        summary.min_dependent_hsic,
        summary.max_independent_hsic,
        summary.counterexample_count
    );

    let rerun = vec![
        "oracle-sweep".to_string(),
        "--m-x".into(),
        args.m_x.to_string(),
        "--m-y".into(),
        args.m_y.to_string(),
        "--resolution".into(),
        args.resolution.to_string(),
        "--kernel-x".into(),
        kx.to_string(),
        "--kernel-y".into(),
        ky.to_string(),
    ];

    Ok(json!({
        "command": "oracle-sweep",
        "version": VERSION,
        "parameters": {
            "m_x": args.m_x,
            "m_y": args.m_y,
            "resolution": args.resolution,
            "kernel_x": kx.to_string(),
            "kernel_y": ky.to_string(),
            "threads": threads,
        },
        "rerun": rerun,
        "status": status,
        "total": summary.total,
        "dependent": summary.dependent,
        "independent": summary.independent,
        "min_dependent_hsic": summary.min_dependent_hsic,
        "max_independent_hsic": summary.max_independent_hsic,
        "characteristic": summary.characteristic,
        "pass": summary.pass,
        "counterexample_count": summary.counterexample_count,
        "counterexamples": summary.counterexamples,
        "duration_seconds": start.elapsed().as_secs_f64(),
    }))
}
