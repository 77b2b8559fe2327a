//! Scratch probe for solver behavior at benchmark-like settings.

use std::time::Instant;

use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::grid::{Field, Grid};
use gpflow::operators::{check_admissibility, Params};
use num_complex::Complex64;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(63);
    let scheme = match args.get(2).map(|s| s.as_str()).unwrap_or("au") {
        "h01" => Scheme::H01,
        "a0" => Scheme::A0,
        _ => Scheme::Au,
    };
    let grad_tol: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1e-9);
    let max_iter: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(5000);
    let alpha_hi: f64 = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(2.0);
    let cg_tol: f64 = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(1e-12);
    let warm: bool = args.get(7).map(|s| s.parse().unwrap()).unwrap_or(true);

    let g = Grid::square(n, 6.0);
    let params = Params::from_fn(
        g,
        |x, y| 0.5 * ((0.9 * x).powi(2) + (1.2 * y).powi(2)),
        100.0,
        1.2,
    );
    println!("admissibility: {}", check_admissibility(&g, &params));
    let u0 = Field::from_fn(g, |x, y| {
        Complex64::new(x, y) / std::f64::consts::PI.sqrt() * (-(x * x + y * y) / 2.0).exp()
    });
    let mut cfg = FlowConfig::new(scheme, StepPolicy::golden(alpha_hi));
    cfg.grad_tol = grad_tol;
    cfg.max_iter = max_iter;
    cfg.record_every = 50;
    cfg.solve = gpflow::linsolve::SolveConfig::with_rel_tol(cg_tol);
    cfg.warm_start = warm;
    let t = Instant::now();
    let report = run_flow(&u0, &params, &cfg).unwrap();
    let dt = t.elapsed().as_secs_f64();
    println!(
        "n={n} scheme={scheme} iters={} reason={} E={:.9} lambda={:.9} resid={:.3e} plateau={:?} wall={dt:.1}s",
        report.iterations,
        report.reason,
        report.energy.total,
        report.rayleigh,
        report.eigen_residual,
        report.plateau,
    );
    for r in report.trace.iter().take(8) {
        println!(
            "  it {:5}  E={:.9}  grad={:.3e} alpha={:.3} gamma={:.6}",
            r.n, r.energy.total, r.grad_norm, r.alpha, r.gamma
        );
    }
    println!("  ...");
    for r in report.trace.iter().rev().take(4).collect::<Vec<_>>().iter().rev() {
        println!(
            "  it {:5}  E={:.9}  grad={:.3e} alpha={:.3} gamma={:.6}",
            r.n, r.energy.total, r.grad_norm, r.alpha, r.gamma
        );
    }
}
