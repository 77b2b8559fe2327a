//! `gpflow mesh-study`: impact of the grid resolution on the local linear
//! convergence rates of the three schemes.
//!
//! Per resolution: compute a reference ground state (a_u, golden steps,
//! tight tolerance), march the configured initial state until it is within
//! `start_rho2` of the reference, then measure each scheme's average rate
//! over `rate_window` golden-step iterations from that common start.

use std::time::Instant;

use serde::Serialize;

use super::CommonArgs;
use crate::config::RateMetric;
use crate::driver::{advance_until_rho2, grid_at_resolution, solve_reference};
use crate::error::CliError;
use crate::output::{csv_f64, write_csv, write_json};
use crate::setup;
use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::quotient::estimate_rate;

#[derive(Serialize)]
struct MeshCell {
    scheme: &'static str,
    resolution: usize,
    rate: f64,
    start_rho2: f64,
    reference_energy: f64,
    reference_iterations: usize,
}

#[derive(Serialize)]
struct MeshStudySummary {
    rate_metric: RateMetric,
    cells: Vec<MeshCell>,
    config: crate::config::RunConfig,
    wall_ms: f64,
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = args.load_effective()?;
    let ms = cfg.mesh_study.clone().unwrap_or_default();
    let wall = Instant::now();
    let schemes = [Scheme::H01, Scheme::A0, Scheme::Au];
    let golden = StepPolicy::GoldenSection {
        alpha_hi: cfg.stepping.alpha_hi,
        tol: cfg.stepping.tol,
        max_eval: cfg.stepping.max_eval,
    };

    let mut cells: Vec<MeshCell> = Vec::new();
    for &resolution in &ms.resolutions {
        let grid = grid_at_resolution(&cfg, resolution);
        let mut scoped = cfg.clone();
        scoped.domain.nx = resolution;
        scoped.domain.ny = resolution;
        let params = setup::build_params(&scoped, grid)?;
        let (u0, _) = setup::build_initial(&scoped, grid, args.seed)?;

        if !args.quiet {
            eprintln!("[mesh-study] {resolution}x{resolution}: solving reference...");
        }
        let reference = solve_reference(&u0, &params, ms.reference_grad_tol, cfg.stopping.max_iter)?;
        let ref_energy = reference.energy.total;

        let start = advance_until_rho2(
            &u0,
            &params,
            Scheme::Au,
            golden,
            &reference.field,
            ms.start_rho2,
            25,
            cfg.stopping.max_iter,
        )?;
        let (_, achieved) = gpflow::quotient::rho_pair(&start, &reference.field);

        for scheme in schemes {
            let mut flow_cfg = FlowConfig::new(scheme, golden);
            flow_cfg.max_iter = ms.rate_window + 1;
            flow_cfg.grad_tol = 1e-14;
            flow_cfg.record_every = 1;
            flow_cfg.reference = Some(reference.field.clone());
            let report = run_flow(&start, &params, &flow_cfg).map_err(CliError::Solver)?;
            let errors: Vec<f64> = match ms.rate_metric {
                RateMetric::Rho2 => report
                    .trace
                    .iter()
                    .map(|r| r.rho2.expect("reference attached"))
                    .collect(),
                RateMetric::Energy => report
                    .trace
                    .iter()
                    .map(|r| (r.energy.total - ref_energy).abs())
                    .collect(),
            };
            let rate = estimate_rate(&errors, ms.rate_window.min(errors.len() - 1))
                .map_err(CliError::Solver)?;
            if !args.quiet {
                eprintln!("[mesh-study] {resolution}x{resolution} {}: rate {rate:.4}", scheme);
            }
            cells.push(MeshCell {
                scheme: scheme.name(),
                resolution,
                rate,
                start_rho2: achieved,
                reference_energy: ref_energy,
                reference_iterations: reference.iterations,
            });
        }
    }

    // Table 1 layout: one row per scheme, one column per resolution.
    let out = cfg.io.out_dir.clone();
    let header = std::iter::once("scheme".to_string())
        .chain(ms.resolutions.iter().map(|r| format!("n{r}")))
        .collect::<Vec<_>>()
        .join(",");
    let rows: Vec<Vec<String>> = schemes
        .iter()
        .map(|scheme| {
            std::iter::once(scheme.name().to_string())
                .chain(ms.resolutions.iter().map(|res| {
                    cells
                        .iter()
                        .find(|c| c.scheme == scheme.name() && c.resolution == *res)
                        .map(|c| csv_f64(c.rate))
                        .unwrap_or_default()
                }))
                .collect()
        })
        .collect();
    write_csv(&header, &rows, &out.join("mesh_rates.csv"))?;

    let summary = MeshStudySummary {
        rate_metric: ms.rate_metric,
        cells,
        config: cfg,
        wall_ms: wall.elapsed().as_secs_f64() * 1e3,
    };
    write_json(&summary, &out.join("mesh_study_summary.json"))?;
    Ok(())
}
