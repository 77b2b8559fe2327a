//! `gpflow check`: the trapping-vs-centrifugal admissibility check.

use super::CommonArgs;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::setup;
use gpflow::operators::{check_admissibility, Admissibility};

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    // never writes files, so the out dir is left untouched
    let cfg = RunConfig::load(&args.config)?;
    let grid = setup::build_grid(&cfg);
    let params = setup::build_params(&cfg, grid)?;
    let verdict = check_admissibility(&grid, &params);
    match verdict {
        Admissibility::Unconstrained => println!("unconstrained: omega = 0"),
        Admissibility::Admissible { k_max } => println!("admissible: K_max = {k_max:.12}"),
        Admissibility::Violated { k_max, node } => println!(
            "violated: K_max = {k_max:.12} <= 0 (worst node ({}, {}))",
            node.0, node.1
        ),
    }
    Ok(())
}
