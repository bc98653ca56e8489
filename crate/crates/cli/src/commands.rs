//! The four experiment commands.

use serde_json::{json, Value};
use trotter_core::bounds::{
    beta_sum_scan, m_gamma_coefficients, m_gamma_solve, n0_threshold, z_constant,
};
use trotter_core::family::{c_gamma_on, estimate_holder, holder_seminorm, sandwiched_modulus};
use trotter_core::rates::{convergence_sweep, rate_fit, ConvergenceReport};
use trotter_core::semigroup::{
    check_onestep_36_on, check_sandwich_37_on, check_smoothing_33, check_stability_53, correspondence_with,
    decade_taus, semigroup_rate, SlotPropagators, StepDifferences, CONSTANT_GRID,
};
use trotter_core::{Error, Variant};

use crate::config::ExperimentConfig;
use crate::output::{Cell, Table};
use crate::{CliError, Outcome, EXIT_CONDITION, EXIT_CRITERION, EXIT_OK};

/// Largest gap tolerated between block-level and pointwise errors.
pub const GAP_TOL: f64 = 1e-10;

fn sample_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 * horizon / n as f64).collect()
}

pub fn run_check(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (a, family) = config.build()?;
    let alpha = config.alpha;
    let grid = config.command_options.holder_grid_n.unwrap_or(config.grid_n.max(64));
    let report = estimate_holder(&family, &a, alpha, grid)?;
    let beta_hat = report.holder_beta_hat;
    let beta_gt_alpha = beta_hat > alpha;
    let beta_gt_2alpha_minus_1 = beta_hat > 2.0 * alpha - 1.0;

    let mut table = Table::new(vec!["delta", "modulus"]);
    let h = config.horizon / grid as f64;
    for (g, m) in sandwiched_modulus(&family, &a, alpha, grid)?.into_iter().enumerate() {
        table.push(vec![Cell::Real((g + 1) as f64 * h), Cell::Real(m)]);
    }
    let json = json!({
        "command": "check",
        "family": family.label(),
        "assumptions": report,
        "conditions": {
            "beta_gt_alpha": beta_gt_alpha,
            "beta_gt_2alpha_minus_1": beta_gt_2alpha_minus_1,
        },
    });
    let exit_code = if beta_gt_2alpha_minus_1 { EXIT_OK } else { EXIT_CONDITION };
    Ok(Outcome { report: json, table, exit_code })
}

enum Fit {
    Ok(ConvergenceReport),
    Degenerate(Error),
}

fn fit(entries: &[(usize, f64)], beta: f64, alpha: f64) -> Result<Fit, CliError> {
    match rate_fit(entries, beta, alpha) {
        Ok(r) => Ok(Fit::Ok(r)),
        Err(e @ (Error::AllBelowFloor | Error::TooFewPoints { .. })) => Ok(Fit::Degenerate(e)),
        Err(e) => Err(e.into()),
    }
}

fn fit_json(f: &Fit) -> Value {
    match f {
        Fit::Ok(r) => json!({
            "slope": r.fitted_slope,
            "log_constant": r.fitted_log_constant,
            "r2": r.r2,
        }),
        Fit::Degenerate(e) => json!({ "degenerate": e.to_string() }),
    }
}

pub fn run_converge(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    if config.n_list.len() < 4 {
        return Err(CliError::Config("converge needs at least 4 entries in n_list".into()));
    }
    let (a, family) = config.build()?;
    let rows = convergence_sweep(&a, &family, &config.n_list, config.grid_n, config.tol)?;
    let beta = family.declared_beta();
    let left: Vec<_> = rows.iter().map(|r| (r.n, r.sup_error_left)).collect();
    let right: Vec<_> = rows.iter().map(|r| (r.n, r.sup_error_right)).collect();
    let (fit_left, fit_right) = (fit(&left, beta, config.alpha)?, fit(&right, beta, config.alpha)?);

    let tolerance = config.command_options.slope_tolerance;
    let passes = |f: &Fit| match f {
        Fit::Ok(r) => r.fitted_slope >= beta - tolerance,
        Fit::Degenerate(_) => true,
    };
    let passed = passes(&fit_left) && passes(&fit_right);
    let slope = |f: &Fit| match f {
        Fit::Ok(r) => Some(r.fitted_slope),
        Fit::Degenerate(_) => None,
    };

    let mut table = Table::new(vec!["n", "sup_error_left", "sup_error_right"]);
    for r in &rows {
        table.push(vec![Cell::Int(r.n), Cell::Real(r.sup_error_left), Cell::Real(r.sup_error_right)]);
    }
    let json = json!({
        "command": "converge",
        "family": family.label(),
        "grid_n": config.grid_n,
        "tol": config.tol,
        "slope_left": slope(&fit_left),
        "slope_right": slope(&fit_right),
        "left": fit_json(&fit_left),
        "right": fit_json(&fit_right),
        "predicted_beta": beta,
        "alpha": config.alpha,
        "condition_ok": beta > 2.0 * config.alpha - 1.0,
        "slope_tolerance": tolerance,
        "passed": passed,
        "entries": rows,
    });
    let exit_code = if passed { EXIT_OK } else { EXIT_CRITERION };
    Ok(Outcome { report: json, table, exit_code })
}

pub fn run_semigroup(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let (a, family) = config.build()?;
    let opts = &config.command_options;
    let n_slots = opts.n_slots;
    let gamma = config.gamma();
    let beta = opts.beta.unwrap_or(family.declared_beta());

    let mut table = Table::new(vec!["n", "variant", "semigroup_error", "propagator_error", "gap", "pairs"]);
    let mut correspondence = Vec::new();
    let mut max_gap = 0.0_f64;
    let mut cache = SlotPropagators::new(&a, &family, n_slots, config.tol);
    for &n in &opts.semigroup_n {
        for (variant, label) in [(Variant::Left, "left"), (Variant::Right, "right")] {
            let c = correspondence_with(&mut cache, variant, n)?;
            max_gap = max_gap.max(c.gap);
            table.push(vec![
                Cell::Int(n),
                Cell::Text(label),
                Cell::Real(c.semigroup_error),
                Cell::Real(c.propagator_error),
                Cell::Real(c.gap),
                Cell::Int(c.pairs),
            ]);
            correspondence.push(json!({ "variant": variant, "result": c }));
        }
    }

    let taus = opts.tau_grid.clone().unwrap_or_else(|| decade_taus(config.horizon));
    let diffs = StepDifferences::compute(&a, &family, &taus, config.grid_n, config.tol)?;
    let onestep = check_onestep_36_on(&a, &family, gamma, &diffs)?;
    let sandwich = check_sandwich_37_on(&a, &family, gamma, beta, &diffs)?;

    let smoothing = if opts.smoothing_slots >= 2 {
        Some(check_smoothing_33(&a, &family, gamma, opts.smoothing_slots, config.tol)?)
    } else {
        None
    };
    let lambda = smoothing.as_ref().map_or(1.0, |s| s.lambda_left.max(1.0));
    let stability = if opts.stability_n > 0 && gamma > family.declared_alpha() {
        Some(check_stability_53(&a, &family, gamma, opts.stability_n, n_slots, lambda)?)
    } else {
        None
    };
    let rates = if opts.semigroup_n.len() >= 4 {
        let left = semigroup_rate(Variant::Left, &a, &family, n_slots, &opts.semigroup_n, config.tol);
        let right = semigroup_rate(Variant::Right, &a, &family, n_slots, &opts.semigroup_n, config.tol);
        let as_json = |r: trotter_core::Result<_>| match r {
            Ok(r) => Ok(json!(r)),
            Err(e @ (Error::AllBelowFloor | Error::TooFewPoints { .. })) => Ok(json!({ "degenerate": e.to_string() })),
            Err(e) => Err(e),
        };
        Some(json!({ "left": as_json(left)?, "right": as_json(right)? }))
    } else {
        None
    };

    let passed = max_gap <= GAP_TOL && onestep.holds && sandwich.holds;
    let json = json!({
        "command": "semigroup",
        "family": family.label(),
        "n_slots": n_slots,
        "gamma": gamma,
        "beta": beta,
        "max_gap": max_gap,
        "correspondence": correspondence,
        "onestep": onestep,
        "sandwich": sandwich,
        "smoothing": smoothing,
        "stability": stability,
        "rates": rates,
        "passed": passed,
    });
    let exit_code = if passed { EXIT_OK } else { EXIT_CRITERION };
    Ok(Outcome { report: json, table, exit_code })
}

fn or_error<T: serde::Serialize>(r: trotter_core::Result<T>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

pub fn run_bounds(config: &ExperimentConfig) -> Result<Outcome, CliError> {
    let opts = &config.command_options;
    let grid: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
    let scan = beta_sum_scan(opts.scan_n_max, &grid)?;
    let all_hold = scan.iter().all(|r| r.holds);
    let mut table = Table::new(vec!["n", "alpha", "gamma", "lhs", "rhs", "holds"]);
    for r in &scan {
        table.push(vec![
            Cell::Int(r.n),
            Cell::Real(r.alpha),
            Cell::Real(r.gamma),
            Cell::Real(r.lhs),
            Cell::Real(r.rhs),
            Cell::Bool(r.holds),
        ]);
    }

    let (a, family) = config.build()?;
    let gamma = config.gamma();
    let beta = opts.beta.unwrap_or(family.declared_beta());
    let horizon = config.horizon;
    let c_gamma = match opts.c_gamma {
        Some(c) => c,
        None => c_gamma_on(&family, &a, gamma, &sample_grid(horizon, CONSTANT_GRID))?,
    };
    let holder_l = match opts.holder_l {
        Some(l) => l,
        None => holder_seminorm(&family, &a, gamma, beta, CONSTANT_GRID)?,
    };
    let lambda = opts.lambda.unwrap_or(1.0);
    let n0 = n0_threshold(gamma, c_gamma, lambda, horizon);
    let (c0, c1, c2) = m_gamma_coefficients(lambda, c_gamma, gamma, config.alpha, horizon);
    let m_n = opts.m_gamma_n.or(n0.as_ref().ok().copied());
    let m_gamma = match m_n {
        Some(n) => or_error(m_gamma_solve(c0, c1, c2, n, gamma, config.alpha)),
        None => json!({ "error": "no n available for the M_gamma solve" }),
    };

    let violations = scan.iter().filter(|r| !r.holds).count();
    let json = json!({
        "command": "bounds",
        "scan": { "n_max": opts.scan_n_max, "rows": scan.len(), "violations": violations, "all_hold": all_hold },
        "parameters": {
            "gamma": gamma,
            "beta": beta,
            "alpha": config.alpha,
            "c_gamma": c_gamma,
            "holder_l": holder_l,
            "lambda": lambda,
            "T": horizon,
        },
        "z_constant": or_error(z_constant(gamma, beta, c_gamma, holder_l, horizon)),
        "n0": or_error(n0),
        "m_gamma": { "n": m_n, "c0": c0, "c1": c1, "c2": c2, "value": m_gamma },
    });
    let exit_code = if all_hold { EXIT_OK } else { EXIT_CRITERION };
    Ok(Outcome { report: json, table, exit_code })
}
