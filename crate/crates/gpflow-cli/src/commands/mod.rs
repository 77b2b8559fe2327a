pub mod align;
pub mod check;
pub mod dissipation;
pub mod fixed_step;
pub mod mesh_study;
pub mod solve;

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::CliError;

/// Flags shared by the config-driven subcommands.
#[derive(Debug, Clone)]
pub struct CommonArgs {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

impl CommonArgs {
    /// Load the config and apply the command-line overrides, so the
    /// effective config embedded in summaries reproduces the run as-is.
    pub fn load_effective(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(out) = &self.out {
            cfg.io.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.initial.seed = Some(seed);
        }
        std::fs::create_dir_all(&cfg.io.out_dir)?;
        Ok(cfg)
    }
}

pub fn require_file(path: &Path, key: &str) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{key}: file not found: {}",
            path.display()
        )))
    }
}
