//! Scratch: map local minima reachable from random initial states.

use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::grid::{retract, Field, Grid};
use gpflow::operators::Params;
use gpflow::testutil::SplitMix64;
use num_complex::Complex64;

fn vortex_count(u: &Field, g: &Grid) -> (i32, i32) {
    let peak = u.values().iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let (mut plus, mut minus) = (0, 0);
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
                    plus += 1;
                } else {
                    minus += 1;
                }
            }
        }
    }
    (plus, minus)
}

fn main() {
    let n: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(127);
    let seeds: u64 = std::env::args()
        .nth(2)
        .map(|s| s.parse().unwrap())
        .unwrap_or(6);
    let g = Grid::square(n, 6.0);
    let params = Params::from_fn(
        g,
        |x, y| 0.5 * ((0.9 * x).powi(2) + (1.2 * y).powi(2)),
        100.0,
        1.2,
    );
    for seed in 0..seeds {
        let mut rng = SplitMix64(seed * 7919 + 1);
        let raw = Field::new(
            g,
            (0..g.len()).map(|_| rng.next_complex()).collect(),
        )
        .unwrap();
        let u0 = retract(&raw).unwrap();
        let mut cfg = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
        cfg.grad_tol = 1e-9;
        cfg.max_iter = 4000;
        cfg.record_every = usize::MAX;
        match run_flow(&u0, &params, &cfg) {
            Ok(report) => {
                let (p, m) = vortex_count(&report.field, &g);
                println!(
                    "seed {seed}: E = {:.9} lambda = {:.9} iters = {} vortices = +{p}/-{m} ({})",
                    report.energy.total, report.rayleigh, report.iterations, report.reason
                );
            }
            Err(e) => println!("seed {seed}: error {e}"),
        }
    }
    // also: the centered-vortex start for comparison
    let v0 = Field::from_fn(g, |x, y| {
        Complex64::new(x, y) / std::f64::consts::PI.sqrt() * (-(x * x + y * y) / 2.0).exp()
    });
    let mut cfg = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg.grad_tol = 1e-9;
    cfg.max_iter = 4000;
    cfg.record_every = usize::MAX;
    let report = run_flow(&v0, &params, &cfg).unwrap();
    let (p, m) = vortex_count(&report.field, &g);
    println!(
        "vortex start: E = {:.9} lambda = {:.9} iters = {} vortices = +{p}/-{m}",
        report.energy.total, report.rayleigh, report.iterations
    );
}
