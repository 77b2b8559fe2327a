//! Shared machinery for the experiment drivers.

use crate::error::CliError;
use gpflow::flow::{run_flow, FlowConfig, Scheme, SolveReport, StepPolicy, Termination};
use gpflow::grid::{Field, Grid};
use gpflow::operators::Params;
use gpflow::quotient::rho_pair;

/// Compute a reference ground state: a_u scheme with golden-section steps
/// down to `grad_tol`.
pub fn solve_reference(
    u0: &Field,
    params: &Params,
    grad_tol: f64,
    max_iter: usize,
) -> Result<SolveReport, CliError> {
    let mut cfg = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg.grad_tol = grad_tol;
    cfg.max_iter = max_iter;
    cfg.record_every = usize::MAX; // no trace needed
    let report = run_flow(u0, params, &cfg)?;
    if report.reason != Termination::GradTol {
        return Err(CliError::NonConvergence(format!(
            "reference solve stopped by {} after {} iterations (grad_tol {grad_tol})",
            report.reason, report.iterations
        )));
    }
    Ok(report)
}

/// March the flow in chunks until the iterate is within `threshold` of the
/// reference in rho2, returning that intermediate state. Overshoots by at
/// most `chunk - 1` iterations.
pub fn advance_until_rho2(
    u0: &Field,
    params: &Params,
    scheme: Scheme,
    policy: StepPolicy,
    reference: &Field,
    threshold: f64,
    chunk: usize,
    max_total: usize,
) -> Result<Field, CliError> {
    let mut u = gpflow::grid::retract(u0)?;
    let mut done = 0usize;
    loop {
        let (_, rho2) = rho_pair(&u, reference);
        if rho2 <= threshold {
            return Ok(u);
        }
        if done >= max_total {
            return Err(CliError::NonConvergence(format!(
                "no iterate reached rho2 <= {threshold:.3e} within {max_total} iterations \
                 (currently {rho2:.3e})"
            )));
        }
        let mut cfg = FlowConfig::new(scheme, policy);
        cfg.max_iter = chunk.min(max_total - done);
        cfg.grad_tol = 1e-14;
        cfg.record_every = usize::MAX;
        let report = run_flow(&u, params, &cfg)?;
        if report.iterations == 0 {
            return Err(CliError::NonConvergence(
                "flow stalled before reaching the requested rho2".into(),
            ));
        }
        done += report.iterations;
        u = report.field;
    }
}

/// Grid with `n` nodes per axis on the configured domain bounds.
pub fn grid_at_resolution(base: &crate::config::RunConfig, n: usize) -> Grid {
    let d = &base.domain;
    Grid::new(n, n, d.xmin, d.xmax, d.ymin, d.ymax)
}

/// Median of a sample (by value); empty slices yield NaN.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
