//! Small helpers shared by the test suites. Not part of the solver API.

use num_complex::Complex64;

use crate::grid::{Field, Grid};

/// SplitMix64; deterministic test data without pulling in an RNG crate.
pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }

    pub fn next_complex(&mut self) -> Complex64 {
        Complex64::new(self.next_f64(), self.next_f64())
    }
}

/// Field with uniform pseudo-random entries in the unit square of C.
pub fn random_field(grid: Grid, seed: u64) -> Field {
    let mut rng = SplitMix64(seed.wrapping_mul(0x2545f4914f6cdd1d).wrapping_add(1));
    let values = (0..grid.len()).map(|_| rng.next_complex()).collect();
    Field::new(grid, values).unwrap()
}

/// Lowest Dirichlet mode of the rectangle,
/// `sin(pi (x - xmin)/Lx) * sin(pi (y - ymin)/Ly)`, unnormalized.
pub fn box_mode(grid: Grid) -> Field {
    let lx = grid.xmax() - grid.xmin();
    let ly = grid.ymax() - grid.ymin();
    let (x0, y0) = (grid.xmin(), grid.ymin());
    Field::from_fn(grid, move |x, y| {
        let s = ((x - x0) * std::f64::consts::PI / lx).sin()
            * ((y - y0) * std::f64::consts::PI / ly).sin();
        Complex64::new(s, 0.0)
    })
}

/// Exact eigenvalue of the 5-point Laplacian for [`box_mode`]:
/// `(4/hx^2) sin^2(pi hx / (2 Lx)) + (4/hy^2) sin^2(pi hy / (2 Ly))`.
pub fn box_mode_eigenvalue(grid: Grid) -> f64 {
    let lx = grid.xmax() - grid.xmin();
    let ly = grid.ymax() - grid.ymin();
    let sx = (std::f64::consts::PI * grid.hx() / (2.0 * lx)).sin();
    let sy = (std::f64::consts::PI * grid.hy() / (2.0 * ly)).sin();
    4.0 / grid.hx().powi(2) * sx * sx + 4.0 / grid.hy().powi(2) * sy * sy
}
