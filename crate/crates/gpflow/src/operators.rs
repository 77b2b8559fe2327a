//! Discrete differential and multiplication operators, and the assembled
//! metric operators behind the three inner products.
//!
//! The Laplacian is the standard 5-point stencil; the angular momentum
//! `Lz = -i (x d/dy - y d/dx)` uses centered differences, which keeps the
//! assembled matrix exactly Hermitian (the coordinate factors depend only
//! on the axis the difference does not touch).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{GpError, Result};
use crate::grid::{assert_same_grid, Field, Grid};
use crate::par;

/// Physics data: sampled trapping potential, interaction strength,
/// angular velocity.
#[derive(Debug, Clone)]
pub struct Params {
    grid: Grid,
    potential: Vec<f64>,
    beta: f64,
    omega: f64,
}

impl Params {
    /// Potential samples must be nonnegative, as must `beta` and `omega`.
    pub fn new(grid: Grid, potential: Vec<f64>, beta: f64, omega: f64) -> Result<Self> {
        if potential.len() != grid.len() {
            return Err(GpError::ShapeMismatch {
                got: potential.len(),
                expected: grid.len(),
            });
        }
        assert!(
            potential.iter().all(|v| *v >= 0.0),
            "trapping potential must be nonnegative"
        );
        assert!(beta >= 0.0, "interaction strength must be nonnegative");
        assert!(omega >= 0.0, "angular velocity must be nonnegative");
        Ok(Self {
            grid,
            potential,
            beta,
            omega,
        })
    }

    /// Sample `v(x, y)` at the interior nodes.
    pub fn from_fn<F>(grid: Grid, v: F, beta: f64, omega: f64) -> Self
    where
        F: Fn(f64, f64) -> f64 + Sync,
    {
        let potential = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                v(x, y)
            })
            .collect();
        Self::new(grid, potential, beta, omega).expect("sampled potential matches grid")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn v_max(&self) -> f64 {
        self.potential.iter().fold(0.0f64, |m, v| m.max(*v))
    }
}

/// Which inner product a metric operator realizes. `Au` carries the
/// density snapshot `|u|^2` it was frozen at.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    H01,
    A0,
    Au(Vec<f64>),
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::H01 => "H01",
            MetricKind::A0 => "a0",
            MetricKind::Au(_) => "a_u",
        }
    }
}

/// Sparse Hermitian matrix over the interior nodes, compressed rows.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        let row = |r: usize| {
            let lo = self.row_ptr[r];
            let hi = self.row_ptr[r + 1];
            let mut acc = Complex64::ZERO;
            for (c, v) in self.col_idx[lo..hi].iter().zip(&self.values[lo..hi]) {
                acc += v * x[*c];
            }
            acc
        };
        if self.n < 1 << 15 {
            for (r, slot) in y.iter_mut().enumerate() {
                *slot = row(r);
            }
        } else {
            y.par_chunks_mut(1 << 14).enumerate().for_each(|(c, chunk)| {
                let base = c * (1 << 14);
                for (off, slot) in chunk.iter_mut().enumerate() {
                    *slot = row(base + off);
                }
            });
        }
    }

    /// Exact structural check `A == A^H`.
    pub fn is_hermitian(&self) -> bool {
        for r in 0..self.n {
            for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[e];
                let mirrored = (self.row_ptr[c]..self.row_ptr[c + 1])
                    .find(|f| self.col_idx[*f] == r)
                    .map(|f| self.values[f]);
                match mirrored {
                    Some(v) if v == self.values[e].conj() => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Real parts of the diagonal entries (the assembled operators all
    /// have real diagonals).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|e| self.col_idx[*e] == r)
                    .map(|e| self.values[e].re)
                    .unwrap_or(0.0)
            })
            .collect()
    }

    /// Entrywise equality including structure.
    pub fn entries_equal(&self, other: &CsrMatrix) -> bool {
        self.n == other.n
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
            && self.values == other.values
    }
}

/// One of the three metric operators, assembled over a fixed grid,
/// potential, and (for `Au`) density snapshot.
#[derive(Debug, Clone)]
pub struct MetricOp {
    kind: MetricKind,
    grid: Grid,
    matrix: CsrMatrix,
}

impl MetricOp {
    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn metric_name(&self) -> &'static str {
        self.kind.name()
    }

    /// `A v` as a field.
    pub fn apply(&self, v: &Field) -> Field {
        assert!(self.grid == *v.grid(), "field lives on a different grid");
        let mut out = Field::zeros(self.grid);
        self.matrix.matvec(v.values(), out.values_mut());
        out
    }
}

/// Discrete `-Δ` with homogeneous Dirichlet boundary (5-point stencil).
pub fn apply_laplacian(u: &Field) -> Field {
    let g = *u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let cx = -1.0 / (g.hx() * g.hx());
    let cy = -1.0 / (g.hy() * g.hy());
    let diag = -2.0 * (cx + cy);
    let vals = u.values();
    let mut out = Field::zeros(g);
    // Accumulate in the same (column) order used by the assembled matrix,
    // so the stencil and the CSR product agree bitwise.
    par::fill_with(out.values_mut(), |k| {
        let i = k % nx;
        let j = k / nx;
        let mut acc = Complex64::ZERO;
        if j > 0 {
            acc += cy * vals[k - nx];
        }
        if i > 0 {
            acc += cx * vals[k - 1];
        }
        acc += diag * vals[k];
        if i + 1 < nx {
            acc += cx * vals[k + 1];
        }
        if j + 1 < ny {
            acc += cy * vals[k + nx];
        }
        acc
    });
    out
}

/// Discrete angular momentum `Lz u = -i (x du/dy - y du/dx)` with centered
/// differences and Dirichlet zero outside the domain.
pub fn apply_lz(u: &Field) -> Field {
    let g = *u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let wx = 1.0 / (2.0 * g.hx());
    let wy = 1.0 / (2.0 * g.hy());
    let vals = u.values();
    let mut out = Field::zeros(g);
    par::fill_with(out.values_mut(), |k| {
        let i = k % nx;
        let j = k / nx;
        let x = g.x(i);
        let y = g.y(j);
        let du_dy = match (j > 0, j + 1 < ny) {
            (true, true) => (vals[k + nx] - vals[k - nx]) * wy,
            (false, true) => vals[k + nx] * wy,
            (true, false) => -vals[k - nx] * wy,
            (false, false) => Complex64::ZERO,
        };
        let du_dx = match (i > 0, i + 1 < nx) {
            (true, true) => (vals[k + 1] - vals[k - 1]) * wx,
            (false, true) => vals[k + 1] * wx,
            (true, false) => -vals[k - 1] * wx,
            (false, false) => Complex64::ZERO,
        };
        -Complex64::i() * (x * du_dy - y * du_dx)
    });
    out
}

/// Assemble the sparse operator for the requested inner product:
/// `-Δ` (+ `V` [+ `β|u|^2`] `- Ω Lz` for `A0`/`Au`).
pub fn assemble_metric(kind: MetricKind, grid: Grid, params: &Params) -> MetricOp {
    assert!(*params.grid() == grid, "params live on a different grid");
    if let MetricKind::Au(density) = &kind {
        debug_assert_eq!(density.len(), grid.len());
        debug_assert!(density.iter().all(|d| *d >= 0.0));
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let n = grid.len();
    let cx = -1.0 / (grid.hx() * grid.hx());
    let cy = -1.0 / (grid.hy() * grid.hy());
    let diag0 = -2.0 * (cx + cy);
    let (with_vw, beta, density): (bool, f64, &[f64]) = match &kind {
        MetricKind::H01 => (false, 0.0, &[]),
        MetricKind::A0 => (true, 0.0, &[]),
        MetricKind::Au(d) => (true, params.beta(), d.as_slice()),
    };
    let omega = if with_vw { params.omega() } else { 0.0 };
    let rot_x = omega / (2.0 * grid.hx());
    let rot_y = omega / (2.0 * grid.hy());

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::with_capacity(5 * n);
    let mut values = Vec::with_capacity(5 * n);
    row_ptr.push(0);
    for k in 0..n {
        let i = k % nx;
        let j = k / nx;
        let x = grid.x(i);
        let y = grid.y(j);
        // -Ω Lz contributes  +iΩ x (u_up - u_down)/(2 hy) - iΩ y (u_r - u_l)/(2 hx)
        if j > 0 {
            col_idx.push(k - nx);
            values.push(Complex64::new(cy, -rot_y * x));
        }
        if i > 0 {
            col_idx.push(k - 1);
            values.push(Complex64::new(cx, rot_x * y));
        }
        let mut d = diag0;
        if with_vw {
            d += params.potential()[k];
        }
        if beta > 0.0 {
            d += beta * density[k];
        }
        col_idx.push(k);
        values.push(Complex64::new(d, 0.0));
        if i + 1 < nx {
            col_idx.push(k + 1);
            values.push(Complex64::new(cx, -rot_x * y));
        }
        if j + 1 < ny {
            col_idx.push(k + nx);
            values.push(Complex64::new(cy, rot_y * x));
        }
        row_ptr.push(col_idx.len());
    }
    MetricOp {
        kind,
        grid,
        matrix: CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        },
    }
}

/// X-inner product `(u, A v)_{L2}`, conjugate-linear in `u`.
pub fn x_inner(op: &MetricOp, u: &Field, v: &Field) -> Complex64 {
    assert_same_grid(u, v);
    crate::grid::l2_inner(u, &op.apply(v))
}

/// X-norm `sqrt(Re (u, A u)_{L2})`.
pub fn x_norm(op: &MetricOp, u: &Field) -> f64 {
    x_inner(op, u, u).re.max(0.0).sqrt()
}

/// Outcome of the trapping-vs-centrifugal admissibility check
/// `V(r) >= (1+K)/4 Ω^2 (x^2 + y^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    /// `Ω = 0`: no constraint on the potential.
    Unconstrained,
    /// Largest admissible constant, positive.
    Admissible { k_max: f64 },
    /// The bound fails; carries the worst node.
    Violated { k_max: f64, node: (usize, usize) },
}

impl Admissibility {
    pub fn k_max(&self) -> Option<f64> {
        match self {
            Admissibility::Admissible { k_max } => Some(*k_max),
            _ => None,
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Admissibility::Violated { .. })
    }
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Admissibility::Unconstrained => write!(f, "unconstrained (omega = 0)"),
            Admissibility::Admissible { k_max } => write!(f, "admissible, K_max = {k_max:.6}"),
            Admissibility::Violated { k_max, node } => write!(
                f,
                "violated at node ({}, {}): K_max = {k_max:.6} <= 0",
                node.0, node.1
            ),
        }
    }
}

/// Minimize `4 V / (Ω^2 (x^2+y^2)) - 1` over interior nodes away from the
/// origin; positive means the potential dominates the centrifugal term.
pub fn check_admissibility(grid: &Grid, params: &Params) -> Admissibility {
    if params.omega() == 0.0 {
        return Admissibility::Unconstrained;
    }
    let om2 = params.omega() * params.omega();
    let mut k_max = f64::INFINITY;
    let mut worst = (0, 0);
    for k in 0..grid.len() {
        let (x, y) = grid.coords(k);
        let r2 = x * x + y * y;
        if r2 == 0.0 {
            continue;
        }
        let ratio = 4.0 * params.potential()[k] / (om2 * r2) - 1.0;
        if ratio < k_max {
            k_max = ratio;
            worst = (k % grid.nx(), k / grid.nx());
        }
    }
    if k_max > 0.0 {
        Admissibility::Admissible { k_max }
    } else {
        Admissibility::Violated { k_max, node: worst }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{l2_inner, mass, retract};
    use crate::testutil::{box_mode, box_mode_eigenvalue, random_field};

    fn harmonic_aniso(grid: Grid, gx: f64, gy: f64, beta: f64, omega: f64) -> Params {
        Params::from_fn(
            grid,
            move |x, y| 0.5 * ((gx * x).powi(2) + (gy * y).powi(2)),
            beta,
            omega,
        )
    }

    #[test]
    fn laplacian_reproduces_box_mode_eigenvalue() {
        let g = Grid::new(21, 17, 0.0, 1.0, -0.5, 1.5);
        let u = box_mode(g);
        let lu = apply_laplacian(&u);
        let lambda = box_mode_eigenvalue(g);
        for (a, b) in lu.values().iter().zip(u.values()) {
            assert!((a - lambda * b).norm() <= 1e-12 * lambda * b.norm().max(1e-3));
        }
    }

    #[test]
    fn laplacian_of_zero_is_zero() {
        let u = Field::zeros(Grid::square(5, 1.0));
        assert!(apply_laplacian(&u)
            .values()
            .iter()
            .all(|v| *v == Complex64::ZERO));
    }

    #[test]
    fn laplacian_quadratic_form_is_positive() {
        let g = Grid::square(9, 2.0);
        for seed in 0..20 {
            let u = random_field(g, seed);
            assert!(l2_inner(&u, &apply_laplacian(&u)).re > 0.0);
        }
    }

    #[test]
    fn lz_is_exact_on_bilinear_away_from_boundary() {
        let g = Grid::square(15, 3.0);
        let u = Field::from_fn(g, |x, y| Complex64::new(x * y, 0.0));
        let lz = apply_lz(&u);
        for j in 2..g.ny() - 2 {
            for i in 2..g.nx() - 2 {
                let (x, y) = (g.x(i), g.y(j));
                let expect = -Complex64::i() * (x * x - y * y);
                assert!(
                    (lz.values()[g.idx(i, j)] - expect).norm() < 1e-12,
                    "node ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn lz_vortex_eigenvalue_error_decays_second_order() {
        // (x + iy) e^{-r^2/2} satisfies Lz u = u; centered differences are
        // second order, so halving h divides the max error by about 4.
        let err_at = |n: usize| -> f64 {
            let g = Grid::square(n, 6.0);
            let u = Field::from_fn(g, |x, y| {
                Complex64::new(x, y) * (-(x * x + y * y) / 2.0).exp()
            });
            let lz = apply_lz(&u);
            lz.values()
                .iter()
                .zip(u.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0f64, f64::max)
        };
        let coarse = err_at(31);
        let fine = err_at(63);
        let ratio = coarse / fine;
        assert!(
            (3.0..=5.0).contains(&ratio),
            "expected ~4x decay, got {ratio} ({coarse} -> {fine})"
        );
    }

    #[test]
    fn lz_is_self_adjoint() {
        let g = Grid::square(10, 2.5);
        let u = random_field(g, 11);
        let v = random_field(g, 12);
        let a = l2_inner(&v, &apply_lz(&u));
        let b = l2_inner(&u, &apply_lz(&v));
        assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn h01_matrix_matches_stencil_bitwise() {
        let g = Grid::new(12, 9, -1.0, 2.0, 0.0, 1.0);
        let params = harmonic_aniso(g, 1.0, 1.0, 3.0, 0.7);
        let op = assemble_metric(MetricKind::H01, g, &params);
        let u = random_field(g, 13);
        let via_matrix = op.apply(&u);
        let via_stencil = apply_laplacian(&u);
        for (a, b) in via_matrix.values().iter().zip(via_stencil.values()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn a0_degenerates_to_h01_without_potential_or_rotation() {
        let g = Grid::square(7, 2.0);
        let trivial = Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let h01 = assemble_metric(MetricKind::H01, g, &trivial);
        let a0 = assemble_metric(MetricKind::A0, g, &trivial);
        assert!(h01.matrix().entries_equal(a0.matrix()));
    }

    #[test]
    fn au_degenerates_to_a0_without_interaction() {
        let g = Grid::square(7, 2.0);
        let params = harmonic_aniso(g, 0.9, 1.2, 0.0, 1.2);
        let density = random_field(g, 14).density();
        let a0 = assemble_metric(MetricKind::A0, g, &params);
        let au = assemble_metric(MetricKind::Au(density), g, &params);
        assert!(a0.matrix().entries_equal(au.matrix()));
    }

    #[test]
    fn all_three_metrics_are_hermitian() {
        let g = Grid::new(8, 6, -2.0, 2.0, -1.5, 1.5);
        let params = harmonic_aniso(g, 0.9, 1.2, 100.0, 1.2);
        let density = random_field(g, 15).density();
        for kind in [MetricKind::H01, MetricKind::A0, MetricKind::Au(density)] {
            let op = assemble_metric(kind, g, &params);
            assert!(op.matrix().is_hermitian(), "{}", op.metric_name());
        }
    }

    #[test]
    fn h01_quadratic_form_is_positive_definite() {
        let g = Grid::square(6, 1.5);
        let params = Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let op = assemble_metric(MetricKind::H01, g, &params);
        for seed in 100..200 {
            let u = random_field(g, seed);
            assert!(x_inner(&op, &u, &u).re > 0.0);
        }
    }

    #[test]
    fn x_inner_of_box_mode_is_its_eigenvalue() {
        let g = Grid::new(19, 19, 0.0, 1.0, 0.0, 1.0);
        let params = Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let op = assemble_metric(MetricKind::H01, g, &params);
        let u = retract(&box_mode(g)).unwrap();
        let lambda = box_mode_eigenvalue(g);
        assert!((x_inner(&op, &u, &u).re - lambda).abs() <= 1e-12 * lambda);
    }

    #[test]
    fn x_inner_is_conjugate_symmetric() {
        let g = Grid::square(8, 3.0);
        let params = harmonic_aniso(g, 0.9, 1.2, 50.0, 1.2);
        let density = random_field(g, 16).density();
        let op = assemble_metric(MetricKind::Au(density), g, &params);
        let u = random_field(g, 17);
        let v = random_field(g, 18);
        let a = x_inner(&op, &u, &v);
        let b = x_inner(&op, &v, &u);
        assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn au_dominates_a0_by_the_density_term() {
        let g = Grid::square(9, 2.0);
        let params = harmonic_aniso(g, 0.9, 1.2, 40.0, 1.2);
        let density = random_field(g, 19).density();
        let a0 = assemble_metric(MetricKind::A0, g, &params);
        let au = assemble_metric(MetricKind::Au(density.clone()), g, &params);
        for seed in 20..30 {
            let v = random_field(g, seed);
            let gap = x_inner(&au, &v, &v).re - x_inner(&a0, &v, &v).re;
            let expect = params.beta()
                * g.cell_weight()
                * density
                    .iter()
                    .zip(v.values())
                    .map(|(d, vk)| d * vk.norm_sqr())
                    .sum::<f64>();
            assert!(expect >= 0.0);
            assert!((gap - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }

    #[test]
    fn a0_lower_bound_from_admissibility_constant() {
        let g = Grid::square(21, 6.0);
        let params = harmonic_aniso(g, 0.9, 1.2, 0.0, 1.2);
        let k = check_admissibility(&g, &params).k_max().unwrap();
        let factor = k / (1.0 + k);
        let h01 = assemble_metric(MetricKind::H01, g, &params);
        let a0 = assemble_metric(MetricKind::A0, g, &params);
        for seed in 40..140 {
            let v = random_field(g, seed);
            let lhs = x_inner(&a0, &v, &v).re;
            let rhs = factor * x_inner(&h01, &v, &v).re;
            assert!(
                lhs >= rhs - 1e-10 * rhs.abs(),
                "seed {seed}: {lhs} < {factor} * {}",
                rhs / factor
            );
        }
    }

    #[test]
    fn admissibility_of_benchmark_potential() {
        // V = ((0.9x)^2 + (1.2y)^2)/2 with omega = 1.2: the minimum of
        // 4V/(om^2 r^2) - 1 sits on the x-axis at 2*0.81/1.44 - 1 = 0.125.
        let g = Grid::square(31, 6.0); // odd count -> nodes exactly on the axes
        let params = harmonic_aniso(g, 0.9, 1.2, 100.0, 1.2);
        let verdict = check_admissibility(&g, &params);
        let k_max = verdict.k_max().expect("admissible");
        assert!((k_max - 0.125).abs() < 1e-12, "{k_max}");

        // brute-force scan oracle
        let mut k_scan = f64::INFINITY;
        for k in 0..g.len() {
            let (x, y) = g.coords(k);
            let r2 = x * x + y * y;
            if r2 > 0.0 {
                k_scan = k_scan.min(4.0 * params.potential()[k] / (1.44 * r2) - 1.0);
            }
        }
        assert_eq!(k_max, k_scan);
    }

    #[test]
    fn admissibility_violation_and_unconstrained_cases() {
        let g = Grid::square(5, 1.0);
        let zero_v = Params::new(g, vec![0.0; g.len()], 0.0, 1.0).unwrap();
        assert!(check_admissibility(&g, &zero_v).is_violated());

        let no_rotation = Params::new(g, vec![0.0; g.len()], 1.0, 0.0).unwrap();
        assert_eq!(
            check_admissibility(&g, &no_rotation),
            Admissibility::Unconstrained
        );
    }

    #[test]
    fn mass_of_retracted_field_is_one() {
        let g = Grid::square(6, 2.0);
        let r = retract(&random_field(g, 77)).unwrap();
        assert!((mass(&r) - 1.0).abs() < 1e-14);
    }
}
