//! Projected Sobolev gradient descent on the unit L2 sphere.
//!
//! One iteration of the `X` scheme, starting from a unit-mass iterate `u`:
//!
//! 1. gradient      `∇_X E(u)` (one Riesz solve for `H01`/`a0`; the `a_u`
//!    gradient is `u` itself);
//! 2. projection    `pg = ∇_X E(u) - γ G_X u` with
//!    `γ = Re(∇, u)_{L2} / Re(u, G_X u)_{L2}`, which makes `pg` tangent:
//!    `Re(pg, u)_{L2} = 0`;
//! 3. step + retract `u <- (u - α pg) / ||u - α pg||`.
//!
//! The step size is either fixed or chosen by golden-section search on the
//! energy along the retracted ray. At a ground state `γ` converges to the
//! eigenvalue λ.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;

use crate::energy::{energy, eigen_residual, first_variation, rayleigh, EnergyBreakdown};
use crate::error::{GpError, Result};
use crate::grid::{fmt_f64, l2_inner, mass, retract, Field};
use crate::linsolve::{riesz_solve_from, SolveConfig};
use crate::operators::{
    apply_laplacian, apply_lz, assemble_metric, check_admissibility, Admissibility, MetricKind,
    MetricOp, Params,
};
use crate::par;
use crate::quotient::rho_pair;

/// Which of the three gradient-flow schemes to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    H01,
    A0,
    Au,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::H01 => "h01",
            Scheme::A0 => "a0",
            Scheme::Au => "au",
        }
    }

    /// Metric kind for this scheme at the current iterate.
    fn metric_kind(self, u: &Field) -> MetricKind {
        match self {
            Scheme::H01 => MetricKind::H01,
            Scheme::A0 => MetricKind::A0,
            Scheme::Au => MetricKind::Au(u.density()),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Step-size policy for the Euler step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    Fixed(f64),
    GoldenSection {
        alpha_hi: f64,
        tol: f64,
        max_eval: usize,
    },
}

impl StepPolicy {
    pub fn golden(alpha_hi: f64) -> Self {
        StepPolicy::GoldenSection {
            alpha_hi,
            tol: 1e-3,
            max_eval: 60,
        }
    }
}

/// How a flow run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// X-norm of the projected gradient fell below `grad_tol`.
    GradTol,
    /// Energy change per iteration fell below `energy_tol`.
    EnergyTol,
    /// Iteration budget exhausted.
    MaxIter,
    /// No energy progress at machine precision for `stagnation_window`
    /// consecutive iterations.
    Stagnation,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::GradTol => "grad_tol",
            Termination::EnergyTol => "energy_tol",
            Termination::MaxIter => "max_iter",
            Termination::Stagnation => "stagnation",
        }
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Configuration of one flow run.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub scheme: Scheme,
    pub step_policy: StepPolicy,
    /// Stop when the X-norm of the projected gradient drops below this.
    pub grad_tol: f64,
    /// Stop when |E_n - E_{n+1}| drops below this; 0 disables.
    pub energy_tol: f64,
    pub max_iter: usize,
    /// Reuse the previous iteration's Riesz solutions as CG initial guesses.
    pub warm_start: bool,
    /// Record a trace row every this many iterations.
    pub record_every: usize,
    /// Linear-solver tolerances for the Riesz maps.
    pub solve: SolveConfig,
    /// Reference state; enables the rho1/rho2 trace columns.
    pub reference: Option<Field>,
    /// Stream trace rows to this CSV (append), flushed as they are written.
    pub trace_csv: Option<PathBuf>,
    /// Assert the per-step energy-dissipation inequality
    /// `E_n - E_{n+1} >= (α/2) ||pg||_X^2 - 1e-10 (1 + |E_n|)` whenever
    /// the step is at most `dissipation_step_threshold`. Opt-in: the
    /// inequality is only guaranteed for small steps, and the admissible
    /// bound is problem-dependent.
    pub dissipation_check: bool,
    pub dissipation_step_threshold: f64,
    pub stagnation_window: usize,
}

impl FlowConfig {
    pub fn new(scheme: Scheme, step_policy: StepPolicy) -> Self {
        Self {
            scheme,
            step_policy,
            grad_tol: 1e-9,
            energy_tol: 0.0,
            max_iter: 50_000,
            warm_start: true,
            record_every: 1,
            solve: SolveConfig::default(),
            reference: None,
            trace_csv: None,
            dissipation_check: false,
            dissipation_step_threshold: 0.1,
            stagnation_window: 100,
        }
    }

    fn validate(&self) {
        match self.step_policy {
            StepPolicy::Fixed(a) => assert!(a > 0.0, "fixed step size must be positive"),
            StepPolicy::GoldenSection {
                alpha_hi,
                tol,
                max_eval,
            } => {
                assert!(alpha_hi > 0.0, "golden-section upper bound must be positive");
                assert!(tol > 0.0, "golden-section tolerance must be positive");
                assert!(max_eval >= 2, "golden section needs at least 2 evaluations");
            }
        }
        assert!(self.grad_tol >= 0.0 && self.energy_tol >= 0.0);
        assert!(self.record_every >= 1, "record_every must be at least 1");
        assert!(self.stagnation_window >= 1);
    }
}

/// One row of the iteration trace, captured before the step `n -> n+1`.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    pub n: usize,
    pub energy: EnergyBreakdown,
    pub rayleigh: f64,
    /// X-norm of the projected gradient at iterate `n`.
    pub grad_norm: f64,
    /// Step size used to leave iterate `n`.
    pub alpha: f64,
    /// Normal-component coefficient; tends to the eigenvalue λ.
    pub gamma: f64,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub wall_ms: f64,
}

pub type FlowTrace = Vec<TraceRecord>;

pub const TRACE_CSV_HEADER: &str = "n,energy_total,energy_kinetic,energy_potential,\
energy_interaction,energy_rotation,rayleigh,grad_norm_X,alpha,gamma,rho1,rho2,wall_ms";

impl TraceRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            self.n,
            fmt_f64(self.energy.total),
            fmt_f64(self.energy.kinetic),
            fmt_f64(self.energy.potential),
            fmt_f64(self.energy.interaction),
            fmt_f64(self.energy.rotation),
            fmt_f64(self.rayleigh),
            fmt_f64(self.grad_norm),
            fmt_f64(self.alpha),
            fmt_f64(self.gamma),
            opt(self.rho1),
            opt(self.rho2),
            self.wall_ms
        )
    }
}

/// An energy plateau observed in the trace: at least 20 consecutive
/// recorded iterations with |ΔE| < 1e-6 while the gradient norm stayed
/// above tolerance. Typical of the flow lingering near an excited state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plateau {
    pub start: usize,
    pub len: usize,
}

/// Outcome of a flow run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub field: Field,
    pub energy: EnergyBreakdown,
    pub rayleigh: f64,
    pub eigen_residual: f64,
    pub iterations: usize,
    pub reason: Termination,
    pub trace: FlowTrace,
    pub admissibility: Admissibility,
    pub plateau: Option<Plateau>,
}

/// Sobolev gradient of the energy in the scheme's metric:
/// `u + G_X(rhs)` with the scheme-specific right-hand side, or plain `u`
/// for `a_u` (and for `a0` with β = 0), where no solve is needed.
pub fn metric_gradient(
    u: &Field,
    params: &Params,
    scheme: Scheme,
    cfg: &SolveConfig,
) -> Result<Field> {
    match gradient_rhs(u, params, scheme) {
        None => Ok(u.clone()),
        Some(rhs) => {
            let op = assemble_metric(scheme.metric_kind(u), *u.grid(), params);
            let mut grad = u.clone();
            grad.axpy(Complex64::ONE, &riesz_solve_from(&op, &rhs, cfg, None)?.field);
            Ok(grad)
        }
    }
}

fn gradient_rhs(u: &Field, params: &Params, scheme: Scheme) -> Option<Field> {
    match scheme {
        Scheme::Au => None,
        Scheme::A0 => {
            if params.beta() == 0.0 {
                return None;
            }
            let mut rhs = Field::zeros(*u.grid());
            let beta = params.beta();
            let vals = u.values();
            par::fill_with(rhs.values_mut(), |k| beta * vals[k].norm_sqr() * vals[k]);
            Some(rhs)
        }
        Scheme::H01 => {
            // V u + β |u|^2 u - Ω Lz u
            let mut rhs = if params.omega() != 0.0 {
                apply_lz(u).scaled(Complex64::new(-params.omega(), 0.0))
            } else {
                Field::zeros(*u.grid())
            };
            let beta = params.beta();
            let pot = params.potential();
            let vals = u.values();
            let out = rhs.values_mut();
            for k in 0..vals.len() {
                out[k] += (pot[k] + beta * vals[k].norm_sqr()) * vals[k];
            }
            Some(rhs)
        }
    }
}

/// X-orthogonal projection of `w` onto the tangent space at `u`:
/// `w - [Re(w, u)_{L2} / Re(u, G_X u)_{L2}] G_X u`.
pub fn project_tangent(
    u: &Field,
    w: &Field,
    scheme: Scheme,
    params: &Params,
    cfg: &SolveConfig,
) -> Result<Field> {
    let op = assemble_metric(scheme.metric_kind(u), *u.grid(), params);
    let g = riesz_solve_from(&op, u, cfg, None)?.field;
    let coef = l2_inner(w, u).re / l2_inner(u, &g).re;
    let mut out = w.clone();
    out.axpy(Complex64::new(-coef, 0.0), &g);
    Ok(out)
}

/// Projected gradient and the coefficient `γ` of the removed normal
/// component. Expects `u` on the constraint manifold (unit mass).
pub fn projected_gradient(
    u: &Field,
    params: &Params,
    scheme: Scheme,
    cfg: &SolveConfig,
) -> Result<(Field, f64)> {
    debug_assert!((mass(u) - 1.0).abs() < 1e-8, "iterate far from unit mass");
    let mut engine = Engine::new(scheme, params, *cfg, false);
    let step = engine.step_data(u)?;
    Ok((step.pg, step.gamma))
}

/// One explicit Euler step followed by retraction.
pub fn euler_step(u: &Field, g: &Field, alpha: f64) -> Result<Field> {
    let mut next = u.clone();
    next.axpy(Complex64::new(-alpha, 0.0), g);
    retract(&next)
}

/// Result of a golden-section line search.
#[derive(Debug, Clone, Copy)]
pub struct GoldenStep {
    pub alpha: f64,
    pub evaluations: usize,
    /// Evaluation budget ran out before the bracket shrank to `tol`;
    /// `alpha` is the best point seen.
    pub hit_cap: bool,
}

/// Golden-section search for `argmin E(R(u - α g))` over `[0, alpha_hi]`.
pub fn golden_step(
    u: &Field,
    g: &Field,
    params: &Params,
    alpha_hi: f64,
    tol: f64,
    max_eval: usize,
) -> GoldenStep {
    let line = LineEnergy::new(u, g, params);
    golden_on(&|a| line.eval(a), alpha_hi, tol, max_eval)
}

fn golden_on(phi: &dyn Fn(f64) -> f64, alpha_hi: f64, tol: f64, max_eval: usize) -> GoldenStep {
    const INVPHI: f64 = 0.618_033_988_749_894_9; // (sqrt 5 - 1) / 2
    let (mut a, mut b) = (0.0f64, alpha_hi);
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = phi(x1);
    let mut f2 = phi(x2);
    let mut evaluations = 2;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    while b - a > tol {
        if evaluations >= max_eval {
            return GoldenStep {
                alpha: best.0,
                evaluations,
                hit_cap: true,
            };
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = phi(x2);
        }
        evaluations += 1;
        let (xc, fc) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
        if fc < best.1 {
            best = (xc, fc);
        }
    }
    GoldenStep {
        alpha: 0.5 * (a + b),
        evaluations,
        hit_cap: false,
    }
}

/// Energy along the retracted ray `α -> E(R(u - α g))`, reduced to scalar
/// coefficients once so each evaluation is O(1).
///
/// Every term of the energy is a polynomial in α divided by the right
/// power of the squared mass `M(α) = ||u - α g||^2`:
/// quadratic terms scale by `1/M`, the quartic interaction by `1/M^2`.
struct LineEnergy {
    // quadratic forms: value(α) = q0 - 2 q1 α + q2 α²
    kin: [f64; 3],
    pot: [f64; 3],
    rot: [f64; 3],
    mass2: [f64; 3],
    // quartic: β/4 Σ |u - αg|^4, coefficients of α^0..α^4
    quart: [f64; 5],
    half_omega: f64,
}

impl LineEnergy {
    fn new(u: &Field, g: &Field, params: &Params) -> Self {
        let grid = *u.grid();
        let w = grid.cell_weight();
        let lu = apply_laplacian(u);
        let lg = apply_laplacian(g);
        let kin = [
            l2_inner(u, &lu).re,
            l2_inner(g, &lu).re,
            l2_inner(g, &lg).re,
        ];
        let pot_of = |a: &Field, b: &Field| {
            let pv = params.potential();
            let av = a.values();
            let bv = b.values();
            w * par::sum_f64(av.len(), |k| pv[k] * (av[k].conj() * bv[k]).re)
        };
        let pot = [pot_of(u, u), pot_of(g, u), pot_of(g, g)];
        let rot = if params.omega() != 0.0 {
            let zu = apply_lz(u);
            let zg = apply_lz(g);
            [
                l2_inner(u, &zu).re,
                l2_inner(g, &zu).re,
                l2_inner(g, &zg).re,
            ]
        } else {
            [0.0; 3]
        };
        let mass2 = [
            l2_inner(u, u).re,
            l2_inner(g, u).re,
            l2_inner(g, g).re,
        ];
        // |u - αg|^2 = a - 2αb + α²c per node; square and sum
        let quart = if params.beta() == 0.0 {
            [0.0; 5]
        } else {
            let uv = u.values();
            let gv = g.values();
            let mut sums = [0.0f64; 6]; // Σ a², Σ ab, Σ b², Σ ac, Σ bc, Σ c²
            for k in 0..uv.len() {
                let a = uv[k].norm_sqr();
                let b = (uv[k].conj() * gv[k]).re;
                let c = gv[k].norm_sqr();
                sums[0] += a * a;
                sums[1] += a * b;
                sums[2] += b * b;
                sums[3] += a * c;
                sums[4] += b * c;
                sums[5] += c * c;
            }
            let s = 0.25 * params.beta() * w;
            [
                s * sums[0],
                s * -4.0 * sums[1],
                s * (4.0 * sums[2] + 2.0 * sums[3]),
                s * -4.0 * sums[4],
                s * sums[5],
            ]
        };
        Self {
            kin,
            pot,
            rot,
            mass2,
            quart,
            half_omega: 0.5 * params.omega(),
        }
    }

    fn eval(&self, alpha: f64) -> f64 {
        let q = |c: &[f64; 3]| c[0] - 2.0 * alpha * c[1] + alpha * alpha * c[2];
        let m = q(&self.mass2);
        if !(m > 0.0) {
            return f64::INFINITY;
        }
        let quadratic = 0.5 * (q(&self.kin) + q(&self.pot)) - self.half_omega * q(&self.rot);
        let a = alpha;
        let quartic = self.quart[0]
            + a * (self.quart[1] + a * (self.quart[2] + a * (self.quart[3] + a * self.quart[4])));
        quadratic / m + quartic / (m * m)
    }
}

struct StepData {
    pg: Field,
    gamma: f64,
    grad_norm: f64,
}

/// Per-run solver state: cached metric operator (rebuilt each iteration
/// for `a_u`, whose density snapshot moves with the iterate) and warm-start
/// vectors for the two Riesz solves.
struct Engine<'a> {
    scheme: Scheme,
    params: &'a Params,
    solve: SolveConfig,
    warm_start: bool,
    op: Option<MetricOp>,
    warm_g: Option<Field>,
    warm_grad: Option<Field>,
}

impl<'a> Engine<'a> {
    fn new(scheme: Scheme, params: &'a Params, solve: SolveConfig, warm_start: bool) -> Self {
        Self {
            scheme,
            params,
            solve,
            warm_start,
            op: None,
            warm_g: None,
            warm_grad: None,
        }
    }

    fn drop_warm_state(&mut self) {
        self.warm_g = None;
        self.warm_grad = None;
    }

    fn refresh_op(&mut self, u: &Field) {
        if self.op.is_none() || self.scheme == Scheme::Au {
            self.op = Some(assemble_metric(
                self.scheme.metric_kind(u),
                *u.grid(),
                self.params,
            ));
        }
    }

    fn step_data(&mut self, u: &Field) -> Result<StepData> {
        self.refresh_op(u);
        let op = self.op.as_ref().expect("operator assembled");

        let guess = self.warm_start.then_some(self.warm_g.as_ref()).flatten();
        let g = riesz_solve_from(op, u, &self.solve, guess)?.field;

        let grad = match gradient_rhs(u, self.params, self.scheme) {
            None => u.clone(),
            Some(rhs) => {
                let guess = self.warm_start.then_some(self.warm_grad.as_ref()).flatten();
                let sol = riesz_solve_from(op, &rhs, &self.solve, guess)?.field;
                let mut grad = u.clone();
                grad.axpy(Complex64::ONE, &sol);
                if self.warm_start {
                    self.warm_grad = Some(sol);
                }
                grad
            }
        };

        let gamma = l2_inner(&grad, u).re / l2_inner(u, &g).re;
        let mut pg = grad;
        pg.axpy(Complex64::new(-gamma, 0.0), &g);
        if self.warm_start {
            self.warm_g = Some(g);
        }
        let grad_norm = l2_inner(&pg, &op.apply(&pg)).re.max(0.0).sqrt();
        Ok(StepData {
            pg,
            gamma,
            grad_norm,
        })
    }
}

/// Run the configured gradient flow from `u0` (retracted first).
///
/// The run proceeds even when the admissibility check fails; the verdict
/// is recorded in the report and indefiniteness, if real, surfaces as a
/// solver error.
pub fn run_flow(u0: &Field, params: &Params, cfg: &FlowConfig) -> Result<SolveReport> {
    cfg.validate();
    let start = Instant::now();
    let mut u = retract(u0)?;
    let admissibility = check_admissibility(u.grid(), params);
    let mut engine = Engine::new(cfg.scheme, params, cfg.solve, cfg.warm_start);

    let mut stream = match &cfg.trace_csv {
        Some(path) => {
            let file = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?;
            let fresh = file.metadata()?.len() == 0;
            let mut f = std::io::BufWriter::new(file);
            if fresh {
                writeln!(f, "{TRACE_CSV_HEADER}")?;
            }
            Some(f)
        }
        None => None,
    };

    let mut trace: FlowTrace = Vec::new();
    fn record(
        rec: TraceRecord,
        trace: &mut FlowTrace,
        stream: &mut Option<std::io::BufWriter<std::fs::File>>,
    ) -> Result<()> {
        if let Some(f) = stream.as_mut() {
            writeln!(f, "{}", rec.csv_row())?;
            f.flush()?;
        }
        trace.push(rec);
        Ok(())
    }

    let mut energy_now = energy(&u, params);
    let mut reason = Termination::MaxIter;
    let mut stagnant = 0usize;
    let mut n = 0usize;

    while n < cfg.max_iter {
        let mut step = engine.step_data(&u)?;
        if step.grad_norm < cfg.grad_tol && cfg.warm_start {
            // Warm-started solves can go stale when the iterate barely
            // moves, collapsing the measured gradient onto an artifact of
            // the frozen Riesz solution. Confirm with fresh solves before
            // declaring convergence.
            engine.drop_warm_state();
            step = engine.step_data(&u)?;
        }
        if step.grad_norm < cfg.grad_tol {
            reason = Termination::GradTol;
            break;
        }

        let alpha = match cfg.step_policy {
            StepPolicy::Fixed(a) => a,
            StepPolicy::GoldenSection {
                alpha_hi,
                tol,
                max_eval,
            } => golden_step(&u, &step.pg, params, alpha_hi, tol, max_eval).alpha,
        };

        if n % cfg.record_every == 0 {
            let (rho1, rho2) = match &cfg.reference {
                Some(r) => {
                    let (r1, r2) = rho_pair(&u, r);
                    (Some(r1), Some(r2))
                }
                None => (None, None),
            };
            record(
                TraceRecord {
                    n,
                    energy: energy_now,
                    rayleigh: rayleigh(&u, params)?,
                    grad_norm: step.grad_norm,
                    alpha,
                    gamma: step.gamma,
                    rho1,
                    rho2,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                },
                &mut trace,
                &mut stream,
            )?;
        }

        let u_next = euler_step(&u, &step.pg, alpha)?;
        debug_assert!((mass(&u_next) - 1.0).abs() < 1e-13);
        let energy_next = energy(&u_next, params);
        let decrease = energy_now.total - energy_next.total;

        if cfg.dissipation_check && alpha <= cfg.dissipation_step_threshold {
            let required = 0.5 * alpha * step.grad_norm * step.grad_norm
                - 1e-10 * (1.0 + energy_now.total.abs());
            if decrease < required {
                return Err(GpError::DissipationViolated {
                    iteration: n,
                    decrease,
                    required,
                    alpha,
                });
            }
        }

        stagnant = if decrease <= 0.0 { stagnant + 1 } else { 0 };
        u = u_next;
        energy_now = energy_next;
        n += 1;

        if cfg.energy_tol > 0.0 && decrease.abs() < cfg.energy_tol {
            reason = Termination::EnergyTol;
            break;
        }
        if stagnant >= cfg.stagnation_window {
            reason = Termination::Stagnation;
            break;
        }
    }

    let final_rayleigh = rayleigh(&u, params)?;
    let final_residual = eigen_residual(&u, params)?;
    let plateau = detect_plateau(&trace, cfg.grad_tol);
    Ok(SolveReport {
        energy: energy_now,
        rayleigh: final_rayleigh,
        eigen_residual: final_residual,
        iterations: n,
        reason,
        trace,
        admissibility,
        plateau,
        field: u,
    })
}

/// First window of >= 20 consecutive records with |ΔE| < 1e-6 while the
/// gradient stayed above tolerance. Report-only; nothing acts on it.
fn detect_plateau(trace: &FlowTrace, grad_tol: f64) -> Option<Plateau> {
    const MIN_LEN: usize = 20;
    const FLAT: f64 = 1e-6;
    let mut run: Option<Plateau> = None;
    for w in trace.windows(2) {
        let flat = (w[1].energy.total - w[0].energy.total).abs() < FLAT
            && w[0].grad_norm > grad_tol
            && w[1].grad_norm > grad_tol;
        match (&mut run, flat) {
            (Some(r), true) => r.len += 1,
            (None, true) => run = Some(Plateau { start: w[0].n, len: 2 }),
            (Some(r), false) if r.len >= MIN_LEN => return run,
            (_, false) => run = None,
        }
    }
    run.filter(|r| r.len >= MIN_LEN)
}

/// Eq. (2.5) consistency: `Re(∇_X E(u), h)_X` must equal
/// `Re(E'(u), h)_{L2}` for every direction. Exposed for tests.
pub fn gradient_pairing_defect(
    u: &Field,
    h: &Field,
    params: &Params,
    scheme: Scheme,
    cfg: &SolveConfig,
) -> Result<f64> {
    let grad = metric_gradient(u, params, scheme, cfg)?;
    let op = assemble_metric(scheme.metric_kind(u), *u.grid(), params);
    let lhs = crate::operators::x_inner(&op, &grad, h).re;
    let rhs = l2_inner(&first_variation(u, params), h).re;
    Ok((lhs - rhs).abs() / rhs.abs().max(1.0))
}
