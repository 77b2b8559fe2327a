//! Run configuration: one flat JSON file per experiment.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use gpflow::flow::{Scheme, StepPolicy};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainCfg,
    pub physics: PhysicsCfg,
    #[serde(default = "default_scheme")]
    pub scheme: SchemeCfg,
    #[serde(default)]
    pub stepping: SteppingCfg,
    #[serde(default)]
    pub stopping: StoppingCfg,
    #[serde(default)]
    pub initial: InitialCfg,
    #[serde(default)]
    pub io: IoCfg,
    /// Extra settings for the `fixed-step` driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_step: Option<FixedStepCfg>,
    /// Extra settings for the `mesh-study` driver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_study: Option<MeshStudyCfg>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainCfg {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsCfg {
    pub potential: PotentialCfg,
    pub beta: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialCfg {
    /// `V(x, y) = ((gamma_x x)^2 + (gamma_y y)^2) / 2`
    HarmonicAniso { gamma_x: f64, gamma_y: f64 },
    Zero,
    /// Samples from a field file (real part).
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeCfg {
    H01,
    A0,
    Au,
}

fn default_scheme() -> SchemeCfg {
    SchemeCfg::Au
}

impl From<SchemeCfg> for Scheme {
    fn from(s: SchemeCfg) -> Scheme {
        match s {
            SchemeCfg::H01 => Scheme::H01,
            SchemeCfg::A0 => Scheme::A0,
            SchemeCfg::Au => Scheme::Au,
        }
    }
}

impl SchemeCfg {
    pub fn name(self) -> &'static str {
        Scheme::from(self).name()
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteppingCfg {
    #[serde(default = "default_policy")]
    pub policy: PolicyCfg,
    /// Step size for the fixed policy.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Golden-section bracket `[0, alpha_hi]`.
    #[serde(default = "default_alpha_hi")]
    pub alpha_hi: f64,
    /// Golden-section bracket tolerance.
    #[serde(default = "default_golden_tol")]
    pub tol: f64,
    #[serde(default = "default_max_eval")]
    pub max_eval: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyCfg {
    Fixed,
    Golden,
}

fn default_policy() -> PolicyCfg {
    PolicyCfg::Golden
}
fn default_alpha() -> f64 {
    0.5
}
fn default_alpha_hi() -> f64 {
    2.0
}
fn default_golden_tol() -> f64 {
    1e-3
}
fn default_max_eval() -> usize {
    60
}

impl Default for SteppingCfg {
    fn default() -> Self {
        Self {
            policy: default_policy(),
            alpha: default_alpha(),
            alpha_hi: default_alpha_hi(),
            tol: default_golden_tol(),
            max_eval: default_max_eval(),
        }
    }
}

impl SteppingCfg {
    pub fn to_policy(self) -> StepPolicy {
        match self.policy {
            PolicyCfg::Fixed => StepPolicy::Fixed(self.alpha),
            PolicyCfg::Golden => StepPolicy::GoldenSection {
                alpha_hi: self.alpha_hi,
                tol: self.tol,
                max_eval: self.max_eval,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingCfg {
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    /// 0 disables the energy-stagnation rule.
    #[serde(default)]
    pub energy_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_grad_tol() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    50_000
}

impl Default for StoppingCfg {
    fn default() -> Self {
        Self {
            grad_tol: default_grad_tol(),
            energy_tol: 0.0,
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCfg {
    #[serde(default = "default_initial_kind")]
    pub kind: InitialKind,
    /// Seed for the random initial state; recorded in the summary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// `(x + iy)/sqrt(pi) exp(-(x^2+y^2)/2)`, retracted.
    Vortex,
    /// `exp(-(x^2+y^2)/2)`, retracted.
    Gauss,
    /// Complex standard normal per node, seeded, retracted.
    Random,
    File,
}

fn default_initial_kind() -> InitialKind {
    InitialKind::Gauss
}

impl Default for InitialCfg {
    fn default() -> Self {
        Self {
            kind: default_initial_kind(),
            seed: None,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoCfg {
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Reference ground-state field; enables the rho error columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_path: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub write_trace: bool,
    #[serde(default = "default_true")]
    pub write_field: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_record_every() -> usize {
    1
}
fn default_true() -> bool {
    true
}

impl Default for IoCfg {
    fn default() -> Self {
        Self {
            out_dir: default_out_dir(),
            record_every: default_record_every(),
            reference_path: None,
            write_trace: true,
            write_field: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedStepCfg {
    /// Near-ground-state initial field (from a prior solve).
    pub start_path: PathBuf,
    #[serde(default = "default_fixed_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_all_schemes")]
    pub schemes: Vec<SchemeCfg>,
    #[serde(default = "default_fixed_iterations")]
    pub iterations: usize,
    /// Largest acceptable rho2 of the start against the reference;
    /// checked when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_threshold: Option<f64>,
}

fn default_fixed_alphas() -> Vec<f64> {
    vec![0.05, 0.5, 1.5]
}
fn default_all_schemes() -> Vec<SchemeCfg> {
    vec![SchemeCfg::H01, SchemeCfg::A0, SchemeCfg::Au]
}
fn default_fixed_iterations() -> usize {
    300
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshStudyCfg {
    #[serde(default = "default_resolutions")]
    pub resolutions: Vec<usize>,
    #[serde(default = "default_rate_window")]
    pub rate_window: usize,
    /// Accuracy of the intermediate start state fed to the rate runs.
    #[serde(default = "default_start_rho2")]
    pub start_rho2: f64,
    /// Gradient tolerance of the per-resolution reference solve.
    #[serde(default = "default_reference_grad_tol")]
    pub reference_grad_tol: f64,
    /// Error sequence driving the rate estimate.
    #[serde(default = "default_rate_metric")]
    pub rate_metric: RateMetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMetric {
    Rho2,
    Energy,
}

fn default_resolutions() -> Vec<usize> {
    vec![15, 31, 63, 127, 255]
}
fn default_rate_window() -> usize {
    100
}
fn default_start_rho2() -> f64 {
    1e-5
}
fn default_reference_grad_tol() -> f64 {
    1e-11
}
fn default_rate_metric() -> RateMetric {
    RateMetric::Rho2
}

impl Default for MeshStudyCfg {
    fn default() -> Self {
        Self {
            resolutions: default_resolutions(),
            rate_window: default_rate_window(),
            start_rho2: default_start_rho2(),
            reference_grad_tol: default_reference_grad_tol(),
            rate_metric: default_rate_metric(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Config(msg));
        let d = &self.domain;
        if d.nx < 3 || d.ny < 3 {
            return fail(format!(
                "domain.nx/domain.ny: need at least 3 interior nodes per axis, got {}x{}",
                d.nx, d.ny
            ));
        }
        if !(d.xmax > d.xmin) || !(d.ymax > d.ymin) {
            return fail("domain bounds: xmax/ymax must exceed xmin/ymin".into());
        }
        if self.physics.beta < 0.0 {
            return fail(format!("physics.beta: must be >= 0, got {}", self.physics.beta));
        }
        if self.physics.omega < 0.0 {
            return fail(format!(
                "physics.omega: must be >= 0, got {}",
                self.physics.omega
            ));
        }
        if let PotentialCfg::HarmonicAniso { gamma_x, gamma_y } = self.physics.potential {
            if !gamma_x.is_finite() || !gamma_y.is_finite() {
                return fail("physics.potential: gamma_x/gamma_y must be finite".into());
            }
        }
        let s = &self.stepping;
        match s.policy {
            PolicyCfg::Fixed if !(s.alpha > 0.0) => {
                return fail(format!("stepping.alpha: must be > 0, got {}", s.alpha));
            }
            PolicyCfg::Golden if !(s.alpha_hi > 0.0 && s.tol > 0.0 && s.max_eval >= 2) => {
                return fail(format!(
                    "stepping: golden policy needs alpha_hi > 0, tol > 0, max_eval >= 2 \
                     (got {}, {}, {})",
                    s.alpha_hi, s.tol, s.max_eval
                ));
            }
            _ => {}
        }
        if !(self.stopping.grad_tol > 0.0) && !(self.stopping.energy_tol > 0.0) {
            return fail("stopping: grad_tol or energy_tol must be positive".into());
        }
        if self.io.record_every == 0 {
            return fail("io.record_every: must be >= 1".into());
        }
        if self.initial.kind == InitialKind::File && self.initial.path.is_none() {
            return fail("initial.path: required when initial.kind is \"file\"".into());
        }
        if let Some(fs) = &self.fixed_step {
            if fs.alphas.iter().any(|a| !(*a > 0.0)) {
                return fail(format!("fixed_step.alphas: all must be > 0, got {:?}", fs.alphas));
            }
            if fs.alphas.is_empty() || fs.schemes.is_empty() {
                return fail("fixed_step: alphas and schemes must be nonempty".into());
            }
            if fs.iterations == 0 {
                return fail("fixed_step.iterations: must be >= 1".into());
            }
        }
        if let Some(ms) = &self.mesh_study {
            if ms.resolutions.is_empty() {
                return fail("mesh_study.resolutions: must be nonempty".into());
            }
            if ms.resolutions.iter().any(|r| *r < 3) {
                return fail(format!(
                    "mesh_study.resolutions: each needs >= 3 nodes, got {:?}",
                    ms.resolutions
                ));
            }
            if ms.rate_window < 2 {
                return fail("mesh_study.rate_window: must be >= 2".into());
            }
            if !(ms.start_rho2 > 0.0) || !(ms.reference_grad_tol > 0.0) {
                return fail("mesh_study: start_rho2 and reference_grad_tol must be > 0".into());
            }
        }
        Ok(())
    }
}
