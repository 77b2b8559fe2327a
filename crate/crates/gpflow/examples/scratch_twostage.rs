//! Scratch: two-stage benchmark protocol. Stage 1 runs the literal vortex
//! start into the excited-state plateau; stage 2 breaks the exact grid
//! symmetry with a tiny seeded perturbation and continues to the ground
//! state.

use std::time::Instant;

use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::grid::{retract, Field, Grid};
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
        .unwrap_or(1e-6);
    let stage1_iters: usize = std::env::args()
        .nth(3)
        .map(|s| s.parse().unwrap())
        .unwrap_or(450);

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

    let t = Instant::now();
    let mut cfg1 = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg1.max_iter = stage1_iters;
    cfg1.grad_tol = 1e-13;
    cfg1.record_every = 1;
    let stage1 = run_flow(&u0, &params, &cfg1).unwrap();
    println!(
        "stage 1: E = {:.9} iters = {} ({}) plateau = {:?} [{:.1}s]",
        stage1.energy.total,
        stage1.iterations,
        stage1.reason,
        stage1.plateau,
        t.elapsed().as_secs_f64()
    );

    let mut rng = SplitMix64(1234);
    let mut seeded = stage1.field.clone();
    for v in seeded.values_mut() {
        *v += eps * rng.next_complex();
    }
    let seeded = retract(&seeded).unwrap();

    let mut cfg2 = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg2.max_iter = 6000;
    cfg2.grad_tol = 1e-10;
    cfg2.record_every = 100;
    let stage2 = run_flow(&seeded, &params, &cfg2).unwrap();
    println!(
        "stage 2 (eps {eps:.1e}): E = {:.9} lambda = {:.9} resid = {:.3e} iters = {} ({}) [total {:.1}s]",
        stage2.energy.total,
        stage2.rayleigh,
        stage2.eigen_residual,
        stage2.iterations,
        stage2.reason,
        t.elapsed().as_secs_f64()
    );
    for r in stage2.trace.iter() {
        println!("  it {:5} E={:.9} grad={:.3e}", r.n, r.energy.total, r.grad_norm);
    }
}
