//! Scratch: is the vortex-start attractor a local minimum or a saddle?
//! Converge from the centered-vortex start, perturb, and re-run.

use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::grid::{mass, retract, Field, Grid};
use gpflow::operators::Params;
use gpflow::testutil::SplitMix64;
use num_complex::Complex64;

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(127);
    let eps: f64 = std::env::args()
        .nth(2)
        .map(|s| s.parse().unwrap())
        .unwrap_or(1e-5);
    let g = Grid::square(n, 6.0);
    let params = Params::from_fn(
        g,
        |x, y| 0.5 * ((0.9 * x).powi(2) + (1.2 * y).powi(2)),
        100.0,
        1.2,
    );
    let v0 = Field::from_fn(g, |x, y| {
        Complex64::new(x, y) / std::f64::consts::PI.sqrt() * (-(x * x + y * y) / 2.0).exp()
    });
    let mut cfg = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg.grad_tol = 1e-10;
    cfg.max_iter = 3000;
    cfg.record_every = usize::MAX;
    let trapped = run_flow(&v0, &params, &cfg).unwrap();
    println!(
        "trapped state: E = {:.9} ({} its)",
        trapped.energy.total, trapped.iterations
    );

    let mut rng = SplitMix64(42);
    let mut perturbed = trapped.field.clone();
    for v in perturbed.values_mut() {
        *v += eps * rng.next_complex();
    }
    let perturbed = retract(&perturbed).unwrap();
    println!("perturbed by {eps:.1e}: mass = {}", mass(&perturbed));

    let mut cfg2 = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg2.grad_tol = 1e-10;
    cfg2.max_iter = 10_000;
    cfg2.record_every = 250;
    let again = run_flow(&perturbed, &params, &cfg2).unwrap();
    println!(
        "re-converged: E = {:.9} ({} its, {})",
        again.energy.total, again.iterations, again.reason
    );
    for r in again.trace.iter() {
        println!("  it {:5} E={:.9} grad={:.3e}", r.n, r.energy.total, r.grad_norm);
    }
}
