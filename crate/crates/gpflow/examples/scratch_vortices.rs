//! Scratch: count vortex cores (local minima of |u|^2 near zero) of the
//! converged benchmark state at a given resolution.

use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::grid::{Field, Grid};
use gpflow::operators::Params;
use num_complex::Complex64;

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(63);
    let g = Grid::square(n, 6.0);
    let params = Params::from_fn(
        g,
        |x, y| 0.5 * ((0.9 * x).powi(2) + (1.2 * y).powi(2)),
        100.0,
        1.2,
    );
    let u0 = Field::from_fn(g, |x, y| {
        Complex64::new(x, y) / std::f64::consts::PI.sqrt() * (-(x * x + y * y) / 2.0).exp()
    });
    let mut cfg = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg.grad_tol = 1e-10;
    cfg.max_iter = 6000;
    cfg.record_every = 1;
    let report = run_flow(&u0, &params, &cfg).unwrap();
    let u = &report.field;
    let peak = u.values().iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    // winding number around each interior plaquette: sum of phase jumps
    let mut vortices = 0;
    let mut antivortices = 0;
    for j in 0..g.ny() - 1 {
        for i in 0..g.nx() - 1 {
            let ks = [
                g.idx(i, j),
                g.idx(i + 1, j),
                g.idx(i + 1, j + 1),
                g.idx(i, j + 1),
            ];
            let mut winding = 0.0;
            for e in 0..4 {
                let a = u.values()[ks[e]];
                let b = u.values()[ks[(e + 1) % 4]];
                winding += (b / a).arg();
            }
            let dens: f64 = ks.iter().map(|k| u.values()[*k].norm_sqr()).sum();
            if winding.abs() > 3.0 && dens > 1e-6 * peak {
                if winding > 0.0 {
                    vortices += 1;
                } else {
                    antivortices += 1;
                }
            }
        }
    }
    println!(
        "n={n} E={:.9} lambda={:.9} iters={} vortices(+)={vortices} vortices(-)={antivortices} plateau={:?}",
        report.energy.total, report.rayleigh, report.iterations, report.plateau
    );
    // energy decrease profile (coarse)
    for r in report.trace.iter().step_by(report.trace.len().max(1) / 15) {
        println!("  it {:5} E={:.9} grad={:.3e}", r.n, r.energy.total, r.grad_norm);
    }
}
