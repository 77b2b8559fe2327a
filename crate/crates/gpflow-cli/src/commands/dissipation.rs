//! `gpflow dissipation`: run all three schemes side by side from one
//! initial state with golden-section steps, and emit the energy-error and
//! optimal-step-size series.

use std::time::Instant;

use serde::Serialize;

use super::CommonArgs;
use crate::config::PolicyCfg;
use crate::error::CliError;
use crate::output::{csv_f64, write_csv, write_json};
use crate::setup;
use gpflow::energy::energy;
use gpflow::flow::{run_flow, Scheme, SolveReport};
use gpflow::grid::Field;
use gpflow::operators::Params;

#[derive(Serialize)]
struct SchemeOutcome {
    scheme: &'static str,
    iterations: usize,
    termination: String,
    final_energy: f64,
    rayleigh: f64,
    eigen_residual: f64,
    median_alpha: f64,
}

#[derive(Serialize)]
struct DissipationSummary {
    reference_energy: f64,
    reference_source: &'static str,
    schemes: Vec<SchemeOutcome>,
    config: crate::config::RunConfig,
    wall_ms: f64,
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let mut cfg = args.load_effective()?;
    // this driver always uses the optimal-step policy
    cfg.stepping.policy = PolicyCfg::Golden;
    let grid = setup::build_grid(&cfg);
    let params = setup::build_params(&cfg, grid)?;
    let (u0, _) = setup::build_initial(&cfg, grid, args.seed)?;
    let reference = setup::load_reference(&cfg, grid)?;

    let start = Instant::now();
    let schemes = [Scheme::H01, Scheme::A0, Scheme::Au];
    let reports = run_side_by_side(&schemes, &u0, &params, &cfg, reference.as_ref())?;

    // Energy errors are measured against the supplied reference, or the
    // best energy any scheme reached.
    let (ref_energy, ref_source) = match &reference {
        Some(r) => (energy(r, &params).total, "reference_field"),
        None => (
            reports
                .iter()
                .map(|r| r.energy.total)
                .fold(f64::INFINITY, f64::min),
            "best_found",
        ),
    };

    let out = cfg.io.out_dir.clone();
    let mut rows = Vec::new();
    for (scheme, report) in schemes.iter().zip(&reports) {
        for rec in &report.trace {
            rows.push(vec![
                rec.n.to_string(),
                scheme.name().to_string(),
                csv_f64((rec.energy.total - ref_energy).abs()),
                csv_f64(rec.alpha),
            ]);
        }
    }
    write_csv("n,scheme,energy_error,alpha", &rows, &out.join("dissipation.csv"))?;

    if reference.is_some() {
        for (scheme, report) in schemes.iter().zip(&reports) {
            let rows: Vec<Vec<String>> = report
                .trace
                .iter()
                .map(|rec| {
                    vec![
                        rec.n.to_string(),
                        csv_f64(rec.rho1.unwrap_or(f64::NAN)),
                        csv_f64(rec.rho2.unwrap_or(f64::NAN)),
                    ]
                })
                .collect();
            write_csv(
                "n,rho1,rho2",
                &rows,
                &out.join(format!("rho_{}.csv", scheme.name())),
            )?;
        }
    }

    let summary = DissipationSummary {
        reference_energy: ref_energy,
        reference_source: ref_source,
        schemes: schemes
            .iter()
            .zip(&reports)
            .map(|(s, r)| {
                let alphas: Vec<f64> = r.trace.iter().map(|t| t.alpha).collect();
                SchemeOutcome {
                    scheme: s.name(),
                    iterations: r.iterations,
                    termination: r.reason.to_string(),
                    final_energy: r.energy.total,
                    rayleigh: r.rayleigh,
                    eigen_residual: r.eigen_residual,
                    median_alpha: crate::driver::median(&alphas),
                }
            })
            .collect(),
        config: cfg,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&summary, &out.join("dissipation_summary.json"))?;

    if !args.quiet {
        for s in &summary.schemes {
            println!(
                "{}: E = {:.9} after {} iterations ({}), median alpha {:.3}",
                s.scheme, s.final_energy, s.iterations, s.termination, s.median_alpha
            );
        }
    }
    Ok(())
}

fn run_side_by_side(
    schemes: &[Scheme],
    u0: &Field,
    params: &Params,
    cfg: &crate::config::RunConfig,
    reference: Option<&Field>,
) -> Result<Vec<SolveReport>, CliError> {
    let results: Vec<Result<SolveReport, gpflow::GpError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = schemes
            .iter()
            .map(|scheme| {
                let mut flow_cfg = setup::flow_config(cfg);
                flow_cfg.scheme = *scheme;
                flow_cfg.reference = reference.cloned();
                scope.spawn(move || run_flow(u0, params, &flow_cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("flow thread panicked"))
            .collect()
    });
    results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Solver)
}
