//! Summary JSON and CSV emission.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use gpflow::energy::EnergyBreakdown;
use gpflow::flow::{SolveReport, TRACE_CSV_HEADER};
use gpflow::operators::Admissibility;

#[derive(Debug, Serialize)]
pub struct EnergyJson {
    pub total: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
    pub rotation: f64,
}

impl From<EnergyBreakdown> for EnergyJson {
    fn from(e: EnergyBreakdown) -> Self {
        Self {
            total: e.total,
            kinetic: e.kinetic,
            potential: e.potential,
            interaction: e.interaction,
            rotation: e.rotation,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdmissibilityJson {
    Unconstrained,
    Admissible { k_max: f64 },
    Violated { k_max: f64, node: (usize, usize) },
}

impl From<Admissibility> for AdmissibilityJson {
    fn from(a: Admissibility) -> Self {
        match a {
            Admissibility::Unconstrained => AdmissibilityJson::Unconstrained,
            Admissibility::Admissible { k_max } => AdmissibilityJson::Admissible { k_max },
            Admissibility::Violated { k_max, node } => {
                AdmissibilityJson::Violated { k_max, node }
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PlateauJson {
    pub start: usize,
    pub len: usize,
}

/// Summary of one `solve` run. Identical configs and seeds produce
/// byte-identical summaries apart from `wall_ms`.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub energy: EnergyJson,
    pub rayleigh: f64,
    pub eigen_residual: f64,
    pub iterations: usize,
    pub termination: String,
    pub admissibility: AdmissibilityJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plateau: Option<PlateauJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: RunConfig,
    pub wall_ms: f64,
}

impl Summary {
    pub fn from_report(
        report: &SolveReport,
        config: RunConfig,
        seed: Option<u64>,
        wall_ms: f64,
    ) -> Self {
        Self {
            energy: report.energy.into(),
            rayleigh: report.rayleigh,
            eigen_residual: report.eigen_residual,
            iterations: report.iterations,
            termination: report.reason.to_string(),
            admissibility: report.admissibility.into(),
            plateau: report.plateau.map(|p| PlateauJson {
                start: p.start,
                len: p.len,
            }),
            seed,
            config,
            wall_ms,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn write_trace_csv(report: &SolveReport, path: &Path) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{TRACE_CSV_HEADER}")?;
    for rec in &report.trace {
        writeln!(w, "{}", rec.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// Plain comma-joined rows under a fixed header; numbers at full precision.
pub fn write_csv(header: &str, rows: &[Vec<String>], path: &Path) -> Result<(), CliError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{header}")?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_f64(x: f64) -> String {
    gpflow::grid::fmt_f64(x)
}
