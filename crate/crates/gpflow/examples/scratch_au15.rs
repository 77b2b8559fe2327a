//! Scratch: ratio behavior of the (au, 1.5) fixed-step cell.

use gpflow::flow::{run_flow, FlowConfig, Scheme, StepPolicy};
use gpflow::grid::{retract, Field, Grid};
use gpflow::operators::Params;
use gpflow::quotient::rho_pair;
use gpflow::testutil::SplitMix64;
use num_complex::Complex64;

fn main() {
    let g = Grid::square(127, 6.0);
    let params = Params::from_fn(
        g,
        |x, y| 0.5 * ((0.9 * x).powi(2) + (1.2 * y).powi(2)),
        100.0,
        1.2,
    );
    // reference
    let mut rng = SplitMix64(20250809u64.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(1));
    let raw = Field::new(g, (0..g.len()).map(|_| rng.next_complex()).collect()).unwrap();
    let u0 = retract(&raw).unwrap();
    let mut cfg = FlowConfig::new(Scheme::Au, StepPolicy::golden(2.0));
    cfg.grad_tol = 1e-11;
    cfg.max_iter = 30000;
    cfg.record_every = usize::MAX;
    let reference = run_flow(&u0, &params, &cfg).unwrap().field;

    let mut start = reference.clone();
    let mut rng2 = SplitMix64(99);
    let noise = Field::new(g, (0..g.len()).map(|_| rng2.next_complex()).collect()).unwrap();
    let h01 = gpflow::operators::assemble_metric(gpflow::operators::MetricKind::H01, g, &params);
    let nh = gpflow::operators::x_inner(&h01, &noise, &noise).re.sqrt();
    start.axpy(Complex64::new(8e-6 / nh, 0.0), &noise);
    let start = retract(&start).unwrap();

    let mut cell = FlowConfig::new(Scheme::Au, StepPolicy::Fixed(1.5));
    cell.max_iter = 250;
    cell.grad_tol = 1e-13;
    cell.record_every = 1;
    cell.reference = Some(reference.clone());
    let report = run_flow(&start, &params, &cell).unwrap();
    let mut errs: Vec<f64> = report.trace.iter().map(|r| r.rho2.unwrap()).collect();
    errs.push(rho_pair(&report.field, &reference).1);
    for (n, pair) in errs.windows(2).enumerate() {
        if n % 5 == 0 || n > 195 {
            println!("it {:3}  rho2 {:.6e}  ratio {:.6}", n, pair[0], pair[1] / pair[0]);
        }
    }
}
