//! Construction of grids, physics parameters, and initial states from a
//! run configuration.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialKind, PotentialCfg, RunConfig};
use crate::error::CliError;
use gpflow::flow::FlowConfig;
use gpflow::grid::{load_field, retract, Field, Grid};
use gpflow::operators::Params;

pub fn build_grid(cfg: &RunConfig) -> Grid {
    let d = &cfg.domain;
    Grid::new(d.nx, d.ny, d.xmin, d.xmax, d.ymin, d.ymax)
}

pub fn build_params(cfg: &RunConfig, grid: Grid) -> Result<Params, CliError> {
    let samples = match &cfg.physics.potential {
        PotentialCfg::Zero => vec![0.0; grid.len()],
        PotentialCfg::HarmonicAniso { gamma_x, gamma_y } => {
            let (gx, gy) = (*gamma_x, *gamma_y);
            (0..grid.len())
                .map(|k| {
                    let (x, y) = grid.coords(k);
                    0.5 * ((gx * x).powi(2) + (gy * y).powi(2))
                })
                .collect()
        }
        PotentialCfg::File { path } => {
            let f = load_field(path)?;
            if f.grid() != &grid {
                return Err(CliError::Config(format!(
                    "physics.potential.path: grid in {} does not match domain ({}x{})",
                    path.display(),
                    grid.nx(),
                    grid.ny()
                )));
            }
            f.values().iter().map(|v| v.re).collect()
        }
    };
    if samples.iter().any(|v| *v < 0.0) {
        return Err(CliError::Config(
            "physics.potential: sampled potential has negative entries".into(),
        ));
    }
    Params::new(grid, samples, cfg.physics.beta, cfg.physics.omega).map_err(CliError::Solver)
}

/// Build the configured initial state (retracted) plus the effective seed
/// when the state is random.
pub fn build_initial(
    cfg: &RunConfig,
    grid: Grid,
    seed_override: Option<u64>,
) -> Result<(Field, Option<u64>), CliError> {
    match cfg.initial.kind {
        InitialKind::Vortex => {
            let raw = Field::from_fn(grid, |x, y| {
                Complex64::new(x, y) / std::f64::consts::PI.sqrt()
                    * (-(x * x + y * y) / 2.0).exp()
            });
            Ok((retract(&raw)?, None))
        }
        InitialKind::Gauss => {
            let raw = Field::from_fn(grid, |x, y| {
                Complex64::new((-(x * x + y * y) / 2.0).exp(), 0.0)
            });
            Ok((retract(&raw)?, None))
        }
        InitialKind::Random => {
            let seed = seed_override.or(cfg.initial.seed).unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut values = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                // Box-Muller from uniform draws keeps the dependency light.
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r = (-2.0 * u1.ln()).sqrt();
                values.push(Complex64::new(r * u2.cos(), r * u2.sin()));
            }
            let raw = Field::new(grid, values).map_err(CliError::Solver)?;
            Ok((retract(&raw)?, Some(seed)))
        }
        InitialKind::File => {
            let path = cfg.initial.path.as_ref().expect("validated");
            let f = load_field(path)?;
            if f.grid() != &grid {
                return Err(CliError::Config(format!(
                    "initial.path: grid in {} does not match domain ({}x{})",
                    path.display(),
                    grid.nx(),
                    grid.ny()
                )));
            }
            Ok((retract(&f)?, None))
        }
    }
}

pub fn load_reference(cfg: &RunConfig, grid: Grid) -> Result<Option<Field>, CliError> {
    match &cfg.io.reference_path {
        None => Ok(None),
        Some(path) => {
            let f = load_field(path)?;
            if f.grid() != &grid {
                return Err(CliError::Config(format!(
                    "io.reference_path: grid in {} does not match domain ({}x{})",
                    path.display(),
                    grid.nx(),
                    grid.ny()
                )));
            }
            Ok(Some(f))
        }
    }
}

pub fn flow_config(cfg: &RunConfig) -> FlowConfig {
    let mut fc = FlowConfig::new(cfg.scheme.into(), cfg.stepping.to_policy());
    fc.grad_tol = cfg.stopping.grad_tol;
    fc.energy_tol = cfg.stopping.energy_tol;
    fc.max_iter = cfg.stopping.max_iter;
    fc.record_every = cfg.io.record_every;
    fc
}
