//! `gpflow fixed-step`: local convergence-rate study with constant step
//! sizes, started from a near-ground-state field.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{require_file, CommonArgs};
use crate::error::CliError;
use crate::output::{csv_f64, write_csv, write_json};
use crate::setup;
use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::grid::{load_field, Field};
use gpflow::operators::Params;
use gpflow::quotient::rho_pair;

#[derive(Serialize)]
struct CellOutcome {
    scheme: &'static str,
    alpha: f64,
    status: String,
    rho2_first: f64,
    rho2_last: f64,
    /// Mean of the trailing error ratios (NaN when unavailable).
    tail_ratio_mean: f64,
    tail_ratio_std: f64,
    iterations: usize,
}

#[derive(Serialize)]
struct FixedStepSummary {
    start_rho2: f64,
    cells: Vec<CellOutcome>,
    config: crate::config::RunConfig,
    wall_ms: f64,
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.load_effective()?;
    let fs = cfg.fixed_step.clone().ok_or_else(|| {
        CliError::Config("fixed_step: section required for this subcommand".into())
    })?;
    let reference_path = cfg.io.reference_path.clone().ok_or_else(|| {
        CliError::Config("io.reference_path: required for the fixed-step study".into())
    })?;
    require_file(&fs.start_path, "fixed_step.start_path")?;
    require_file(&reference_path, "io.reference_path")?;

    let grid = setup::build_grid(&cfg);
    let params = setup::build_params(&cfg, grid)?;
    let reference = setup::load_reference(&cfg, grid)?.expect("checked above");
    let start_field = load_field(&fs.start_path)?;
    if start_field.grid() != &grid {
        return Err(CliError::Config(format!(
            "fixed_step.start_path: grid in {} does not match domain",
            fs.start_path.display()
        )));
    }

    let (_, start_rho2) = rho_pair(&start_field, &reference);
    if let Some(threshold) = fs.start_threshold {
        if start_rho2 > threshold {
            return Err(CliError::Config(format!(
                "fixed_step.start_threshold: start state has rho2 = {start_rho2:.3e} \
                 against the reference, above the requested {threshold:.3e}"
            )));
        }
    }

    let wall = Instant::now();
    let cells: Vec<(Scheme, f64)> = fs
        .schemes
        .iter()
        .flat_map(|s| fs.alphas.iter().map(move |a| (Scheme::from(*s), *a)))
        .collect();

    let results: Vec<(Scheme, f64, Result<Cell, gpflow::GpError>)> = cells
        .par_iter()
        .map(|(scheme, alpha)| {
            let outcome = run_cell(
                *scheme,
                *alpha,
                &start_field,
                &params,
                &reference,
                fs.iterations,
            );
            (*scheme, *alpha, outcome)
        })
        .collect();

    let out = cfg.io.out_dir.clone();
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for (scheme, alpha, result) in &results {
        match result {
            Ok(cell) => {
                for (n, rho2) in cell.errors.iter().enumerate() {
                    let ratio = if n == 0 {
                        String::new()
                    } else {
                        csv_f64(rho2 / cell.errors[n - 1])
                    };
                    rows.push(vec![
                        scheme.name().to_string(),
                        csv_f64(*alpha),
                        n.to_string(),
                        csv_f64(*rho2),
                        ratio,
                    ]);
                }
                let ratios: Vec<f64> = cell
                    .errors
                    .windows(2)
                    .map(|w| w[1] / w[0])
                    .collect();
                let tail = &ratios[ratios.len().saturating_sub(50)..];
                let (mean, std) = crate::driver::mean_std(tail);
                let converged = cell.errors.last().unwrap() < cell.errors.first().unwrap()
                    && mean < 1.0;
                outcomes.push(CellOutcome {
                    scheme: scheme.name(),
                    alpha: *alpha,
                    status: if converged { "converged" } else { "not_converged" }.into(),
                    rho2_first: *cell.errors.first().unwrap(),
                    rho2_last: *cell.errors.last().unwrap(),
                    tail_ratio_mean: mean,
                    tail_ratio_std: std,
                    iterations: cell.errors.len() - 1,
                });
            }
            Err(e) => outcomes.push(CellOutcome {
                scheme: scheme.name(),
                alpha: *alpha,
                status: format!("error: {e}"),
                rho2_first: start_rho2,
                rho2_last: f64::NAN,
                tail_ratio_mean: f64::NAN,
                tail_ratio_std: f64::NAN,
                iterations: 0,
            }),
        }
    }
    write_csv("scheme,alpha,n,rho2,ratio", &rows, &out.join("fixed_step.csv"))?;

    let summary = FixedStepSummary {
        start_rho2,
        cells: outcomes,
        config: cfg,
        wall_ms: wall.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&summary, &out.join("fixed_step_summary.json"))?;

    if !args.quiet {
        for c in &summary.cells {
            println!(
                "({}, {:>5}): {} rho2 {:.3e} -> {:.3e}, tail ratio {:.4} +- {:.4}",
                c.scheme, c.alpha, c.status, c.rho2_first, c.rho2_last,
                c.tail_ratio_mean, c.tail_ratio_std
            );
        }
    }
    Ok(())
}

struct Cell {
    /// rho2 against the reference at iterates 0..=iterations.
    errors: Vec<f64>,
}

fn run_cell(
    scheme: Scheme,
    alpha: f64,
    start: &Field,
    params: &Params,
    reference: &Field,
    iterations: usize,
) -> Result<Cell, gpflow::GpError> {
    let mut cfg = FlowConfig::new(scheme, StepPolicy::Fixed(alpha));
    cfg.max_iter = iterations;
    cfg.grad_tol = 1e-13;
    cfg.record_every = 1;
    cfg.reference = Some(reference.clone());
    let report = run_flow(start, params, &cfg)?;
    let mut errors: Vec<f64> = report
        .trace
        .iter()
        .map(|r| r.rho2.expect("reference attached"))
        .collect();
    let (_, final_rho2) = rho_pair(&report.field, reference);
    errors.push(final_rho2);
    Ok(Cell { errors })
}
