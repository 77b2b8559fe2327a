//! `gpflow solve`: one flow run, fully recorded.

use std::time::Instant;

use super::CommonArgs;
use crate::error::CliError;
use crate::output::{write_json, write_trace_csv, Summary};
use crate::setup;
use gpflow::flow::{run_flow, Termination};
use gpflow::grid::save_field;

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.load_effective()?;
    let grid = setup::build_grid(&cfg);
    let params = setup::build_params(&cfg, grid)?;
    let (u0, seed) = setup::build_initial(&cfg, grid, args.seed)?;
    let mut flow_cfg = setup::flow_config(&cfg);
    flow_cfg.reference = setup::load_reference(&cfg, grid)?;

    let verdict = gpflow::operators::check_admissibility(&grid, &params);
    if verdict.is_violated() && !args.quiet {
        eprintln!("warning: admissibility check failed ({verdict}); proceeding anyway");
    }

    let start = Instant::now();
    let report = run_flow(&u0, &params, &flow_cfg)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let out = cfg.io.out_dir.clone();
    if cfg.io.write_trace {
        write_trace_csv(&report, &out.join("trace.csv"))?;
    }
    if cfg.io.write_field {
        save_field(&report.field, &out.join("final.field.csv"))?;
    }
    let summary = Summary::from_report(&report, cfg, seed, wall_ms);
    write_json(&summary, &out.join("summary.json"))?;

    if !args.quiet {
        println!(
            "{}: E = {:.9}, lambda = {:.9}, residual = {:.3e}, {} iterations ({})",
            summary.config.scheme.name(),
            report.energy.total,
            report.rayleigh,
            report.eigen_residual,
            report.iterations,
            report.reason
        );
    }

    match report.reason {
        Termination::GradTol | Termination::EnergyTol => Ok(()),
        reason => Err(CliError::NonConvergence(format!(
            "terminated by {reason} after {} iterations; outputs written to {}",
            report.iterations,
            out.display()
        ))),
    }
}
