//! The discrete Gross-Pitaevskii energy, its first and second variations,
//! and the eigenvalue estimate.
//!
//! The kinetic term is evaluated through the Laplacian stencil, so the
//! discrete energy is an exact algebraic function of the node values and
//! [`first_variation`] is its exact gradient. Energy-dissipation checks in
//! the flow module rely on this compatibility holding to rounding, not
//! just asymptotically.

use crate::error::{GpError, Result};
use crate::grid::{assert_same_grid, l2_inner, mass, Field};
use crate::operators::{apply_laplacian, apply_lz, Params};
use crate::par;

/// The four terms of the energy. `total = kinetic + potential +
/// interaction - rotation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub interaction: f64,
    pub rotation: f64,
    pub total: f64,
}

/// Evaluate the energy of `u` (not necessarily normalized):
///
/// ```text
/// E(u) = 1/2 (u, -Δu) + 1/2 Σ V|u|^2 + β/4 Σ |u|^4 - Ω/2 Re (u, Lz u)
/// ```
///
/// with the rectangle-rule weight on the sums.
pub fn energy(u: &Field, params: &Params) -> EnergyBreakdown {
    assert!(u.grid() == params.grid(), "params live on a different grid");
    let w = u.grid().cell_weight();
    let vals = u.values();
    let v = params.potential();

    let kinetic = 0.5 * l2_inner(u, &apply_laplacian(u)).re;
    let potential = 0.5 * w * par::sum_f64(vals.len(), |k| v[k] * vals[k].norm_sqr());
    let interaction = if params.beta() == 0.0 {
        0.0
    } else {
        0.25 * params.beta() * w * par::sum_f64(vals.len(), |k| vals[k].norm_sqr().powi(2))
    };
    let rotation = if params.omega() == 0.0 {
        0.0
    } else {
        0.5 * params.omega() * l2_inner(u, &apply_lz(u)).re
    };
    EnergyBreakdown {
        kinetic,
        potential,
        interaction,
        rotation,
        total: kinetic + potential + interaction - rotation,
    }
}

/// L2 representative of the energy gradient:
/// `e = -Δu + Vu + β|u|^2 u - Ω Lz u`, so that
/// `d/dt E(u + t v)|_0 = Re (e, v)_{L2}` exactly in the discrete algebra.
pub fn first_variation(u: &Field, params: &Params) -> Field {
    assert!(u.grid() == params.grid(), "params live on a different grid");
    let mut e = apply_laplacian(u);
    let vals = u.values();
    let v = params.potential();
    let beta = params.beta();
    let out = e.values_mut();
    if beta == 0.0 {
        for k in 0..vals.len() {
            out[k] += v[k] * vals[k];
        }
    } else {
        for k in 0..vals.len() {
            out[k] += (v[k] + beta * vals[k].norm_sqr()) * vals[k];
        }
    }
    if params.omega() != 0.0 {
        let lz = apply_lz(u);
        let om = params.omega();
        for (ek, lk) in out.iter_mut().zip(lz.values()) {
            *ek -= om * lk;
        }
    }
    e
}

/// Eigenvalue estimate `λ(u) = Re (E'(u), u) / ||u||^2`; the Lagrange
/// multiplier of the mass constraint at a stationary point. Dividing by
/// the squared mass keeps it usable slightly off the constraint manifold.
pub fn rayleigh(u: &Field, params: &Params) -> Result<f64> {
    let m2 = l2_inner(u, u).re;
    if m2 == 0.0 {
        return Err(GpError::ZeroMass);
    }
    Ok(l2_inner(&first_variation(u, params), u).re / m2)
}

/// Max-norm of the eigenproblem residual `E'(u) - λ(u) u` for unit-mass `u`.
pub fn eigen_residual(u: &Field, params: &Params) -> Result<f64> {
    let m = mass(u);
    if (m - 1.0).abs() > 1e-12 {
        return Err(GpError::NotNormalized { mass: m });
    }
    let lambda = rayleigh(u, params)?;
    let e = first_variation(u, params);
    Ok(e.values()
        .iter()
        .zip(u.values())
        .map(|(ek, uk)| (ek - lambda * uk).norm())
        .fold(0.0f64, f64::max))
}

/// Action of the energy Hessian at `u` on a direction `v`:
/// `-Δv + Vv + β|u|^2 v - Ω Lz v + 2β Re(conj(u) v) u`.
pub fn second_variation_apply(u: &Field, v: &Field, params: &Params) -> Field {
    assert_same_grid(u, v);
    let mut h = first_variation_linear_part(v, params);
    let beta = params.beta();
    if beta != 0.0 {
        let uv = u.values();
        let vv = v.values();
        let out = h.values_mut();
        for k in 0..uv.len() {
            let cross = (uv[k].conj() * vv[k]).re;
            out[k] += beta * (uv[k].norm_sqr() * vv[k] + 2.0 * cross * uv[k]);
        }
    }
    h
}

/// `-Δv + Vv - Ω Lz v` (the `A0` operator applied through the stencils).
fn first_variation_linear_part(v: &Field, params: &Params) -> Field {
    let mut e = apply_laplacian(v);
    let pot = params.potential();
    {
        let out = e.values_mut();
        for (k, vk) in v.values().iter().enumerate() {
            out[k] += pot[k] * vk;
        }
    }
    if params.omega() != 0.0 {
        let lz = apply_lz(v);
        let om = params.omega();
        for (ek, lk) in e.values_mut().iter_mut().zip(lz.values()) {
            *ek -= om * lk;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{retract, Grid};
    use crate::operators::{assemble_metric, x_inner, MetricKind};
    use crate::testutil::{box_mode, box_mode_eigenvalue, random_field};
    use num_complex::Complex64;

    fn benchish(grid: Grid, beta: f64, omega: f64) -> Params {
        Params::from_fn(
            grid,
            |x, y| 0.5 * ((0.9 * x).powi(2) + (1.2 * y).powi(2)),
            beta,
            omega,
        )
    }

    #[test]
    fn breakdown_terms_have_the_right_signs() {
        let g = Grid::square(9, 3.0);
        let params = benchish(g, 25.0, 1.2);
        let u = random_field(g, 1);
        let e = energy(&u, &params);
        assert!(e.kinetic >= 0.0);
        assert!(e.potential >= 0.0);
        assert!(e.interaction >= 0.0);
        assert_eq!(e.total, e.kinetic + e.potential + e.interaction - e.rotation);
    }

    #[test]
    fn box_mode_energy_is_half_its_eigenvalue() {
        let g = Grid::new(25, 25, 0.0, 1.0, 0.0, 1.0);
        let params = Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let u = retract(&box_mode(g)).unwrap();
        let total = energy(&u, &params).total;
        let expect = 0.5 * box_mode_eigenvalue(g);
        assert!((total - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn harmonic_ground_state_energy_on_fine_grid() {
        // -Δ + r^2/2 has ground eigenvalue sqrt(2) with eigenfunction
        // e^{-r^2/(2 sqrt 2)}; the energy of the normalized state is λ/2.
        let g = Grid::square(255, 6.0);
        let params = Params::from_fn(g, |x, y| 0.5 * (x * x + y * y), 0.0, 0.0);
        let u = retract(&Field::from_fn(g, |x, y| {
            Complex64::new((-(x * x + y * y) / (2.0 * 2.0f64.sqrt())).exp(), 0.0)
        }))
        .unwrap();
        let total = energy(&u, &params).total;
        let expect = 2.0f64.sqrt() / 2.0;
        assert!((total - expect).abs() < 5e-3, "{total} vs {expect}");
        let lam = rayleigh(&u, &params).unwrap();
        assert!((lam - 2.0f64.sqrt()).abs() < 1e-2, "{lam}");
    }

    #[test]
    fn rayleigh_error_decays_second_order_on_analytic_state() {
        let err_at = |n: usize| {
            let g = Grid::square(n, 6.0);
            let params = Params::from_fn(g, |x, y| 0.5 * (x * x + y * y), 0.0, 0.0);
            let u = retract(&Field::from_fn(g, |x, y| {
                Complex64::new((-(x * x + y * y) / (2.0 * 2.0f64.sqrt())).exp(), 0.0)
            }))
            .unwrap();
            (rayleigh(&u, &params).unwrap() - 2.0f64.sqrt()).abs()
        };
        let ratio = err_at(63) / err_at(127);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn vortex_rotation_term_reflects_unit_angular_momentum() {
        // Lz (x+iy)e^{-r^2/2} = (x+iy)e^{-r^2/2}, so the rotation term over
        // the squared mass tends to Ω/2 = 0.6 at second order in h.
        let ratio_err = |n: usize| {
            let g = Grid::square(n, 6.0);
            let params = benchish(g, 100.0, 1.2);
            let u = Field::from_fn(g, |x, y| {
                Complex64::new(x, y) / std::f64::consts::PI.sqrt()
                    * (-(x * x + y * y) / 2.0).exp()
            });
            let m2 = l2_inner(&u, &u).re;
            (energy(&u, &params).rotation / m2 - 0.6).abs()
        };
        let coarse = ratio_err(63);
        let fine = ratio_err(127);
        assert!(coarse < 1e-2, "{coarse}");
        assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
    }

    #[test]
    fn first_variation_matches_central_differences() {
        let g = Grid::square(11, 3.0);
        let params = benchish(g, 5.0, 1.0);
        let u = random_field(g, 2);
        let v = random_field(g, 3);
        let e = first_variation(&u, &params);
        let directional = l2_inner(&e, &v).re;
        let t = 1e-5;
        let mut up = u.clone();
        up.axpy(Complex64::new(t, 0.0), &v);
        let mut dn = u.clone();
        dn.axpy(Complex64::new(-t, 0.0), &v);
        let fd = (energy(&up, &params).total - energy(&dn, &params).total) / (2.0 * t);
        assert!(
            (fd - directional).abs() <= 1e-6 * directional.abs(),
            "{fd} vs {directional}"
        );
    }

    #[test]
    fn first_variation_of_box_mode_is_eigen_scaled() {
        let g = Grid::new(15, 15, 0.0, 1.0, 0.0, 1.0);
        let params = Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let u = box_mode(g);
        let e = first_variation(&u, &params);
        let lambda = box_mode_eigenvalue(g);
        for (ek, uk) in e.values().iter().zip(u.values()) {
            assert!((ek - lambda * uk).norm() <= 1e-12 * lambda * uk.norm().max(1e-6));
        }
    }

    #[test]
    fn first_variation_of_zero_is_zero() {
        let g = Grid::square(5, 1.0);
        let params = benchish(g, 10.0, 0.5);
        let e = first_variation(&Field::zeros(g), &params);
        assert!(e.values().iter().all(|v| *v == Complex64::ZERO));
    }

    #[test]
    fn rayleigh_agrees_with_the_au_quadratic_form() {
        let g = Grid::square(10, 3.0);
        let params = benchish(g, 30.0, 1.2);
        let u = random_field(g, 4);
        let lam = rayleigh(&u, &params).unwrap();
        let op = assemble_metric(MetricKind::Au(u.density()), *u.grid(), &params);
        let m2 = l2_inner(&u, &u).re;
        let via_form = x_inner(&op, &u, &u).re / m2;
        assert!((lam - via_form).abs() <= 1e-12 * via_form.abs().max(1.0));
    }

    #[test]
    fn rayleigh_of_box_mode_is_lambda_h() {
        let g = Grid::new(17, 17, 0.0, 1.0, 0.0, 1.0);
        let params = Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let u = box_mode(g);
        let lam = rayleigh(&u, &params).unwrap();
        let lambda = box_mode_eigenvalue(g);
        assert!((lam - lambda).abs() <= 1e-12 * lambda);
    }

    #[test]
    fn rayleigh_rejects_zero_mass() {
        let g = Grid::square(5, 1.0);
        let params = benchish(g, 0.0, 0.0);
        assert!(matches!(
            rayleigh(&Field::zeros(g), &params),
            Err(GpError::ZeroMass)
        ));
    }

    #[test]
    fn eigen_residual_vanishes_on_exact_discrete_modes() {
        // Residual rounding scales like eps/h^2; keep h moderate.
        let g = Grid::new(15, 15, 0.0, 1.0, 0.0, 1.0);
        let params = Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let u = retract(&box_mode(g)).unwrap();
        assert!(eigen_residual(&u, &params).unwrap() < 1e-12);
    }

    #[test]
    fn eigen_residual_requires_normalization_and_stays_finite() {
        let g = Grid::square(8, 2.0);
        let params = benchish(g, 10.0, 1.0);
        let raw = random_field(g, 5);
        assert!(matches!(
            eigen_residual(&raw, &params),
            Err(GpError::NotNormalized { .. })
        ));
        let u = retract(&raw).unwrap();
        let r = eigen_residual(&u, &params).unwrap();
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn hessian_reduces_to_a0_when_beta_vanishes() {
        let g = Grid::square(9, 2.5);
        let params = benchish(g, 0.0, 1.1);
        let u = random_field(g, 6);
        let v = random_field(g, 7);
        let h = second_variation_apply(&u, &v, &params);
        let a0 = assemble_metric(MetricKind::A0, g, &params).apply(&v);
        for (a, b) in h.values().iter().zip(a0.values()) {
            assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0));
        }
    }

    #[test]
    fn hessian_quadratic_form_is_symmetric() {
        let g = Grid::square(9, 2.5);
        let params = benchish(g, 20.0, 1.2);
        let u = random_field(g, 8);
        let v = random_field(g, 9);
        let w = random_field(g, 10);
        let a = l2_inner(&second_variation_apply(&u, &v, &params), &w).re;
        let b = l2_inner(&second_variation_apply(&u, &w, &params), &v).re;
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn hessian_matches_second_central_differences() {
        let g = Grid::square(9, 2.5);
        let params = benchish(g, 8.0, 1.0);
        let u = random_field(g, 11);
        let v = random_field(g, 12);
        let quad = l2_inner(&second_variation_apply(&u, &v, &params), &v).re;
        let t = 1e-4;
        let mut up = u.clone();
        up.axpy(Complex64::new(t, 0.0), &v);
        let mut dn = u.clone();
        dn.axpy(Complex64::new(-t, 0.0), &v);
        let fd = (energy(&up, &params).total - 2.0 * energy(&u, &params).total
            + energy(&dn, &params).total)
            / (t * t);
        assert!((fd - quad).abs() <= 1e-4 * quad.abs(), "{fd} vs {quad}");
    }

    #[test]
    fn energy_is_phase_invariant() {
        let g = Grid::square(9, 3.0);
        let params = benchish(g, 40.0, 1.2);
        let u = random_field(g, 13);
        let base = energy(&u, &params);
        for omega in [0.3, -1.2, std::f64::consts::FRAC_PI_2] {
            let rotated = u.scaled(Complex64::from_polar(1.0, omega));
            let e = energy(&rotated, &params);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-13 * b.abs().max(1.0);
            assert!(close(e.kinetic, base.kinetic));
            assert!(close(e.potential, base.potential));
            assert!(close(e.interaction, base.interaction));
            assert!(close(e.rotation, base.rotation));
            assert!(close(e.total, base.total));
        }
    }

    #[test]
    fn first_variation_is_phase_equivariant() {
        let g = Grid::square(8, 2.0);
        let params = benchish(g, 15.0, 1.2);
        let u = random_field(g, 14);
        let phase = Complex64::from_polar(1.0, 0.9);
        let rotated = first_variation(&u.scaled(phase), &params);
        let expected = first_variation(&u, &params).scaled(phase);
        for (a, b) in rotated.values().iter().zip(expected.values()) {
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-9));
        }
    }

    #[test]
    fn quadratic_part_equals_half_the_a0_form() {
        let g = Grid::square(9, 3.0);
        let params = benchish(g, 35.0, 1.2);
        let u = random_field(g, 15);
        let e = energy(&u, &params);
        let op = assemble_metric(MetricKind::A0, g, &params);
        let half_form = 0.5 * x_inner(&op, &u, &u).re;
        let lhs = e.kinetic + e.potential - e.rotation;
        assert!((lhs - half_form).abs() <= 1e-12 * half_form.abs().max(1.0));
    }

    #[test]
    fn energy_error_decays_second_order_under_refinement() {
        let err_at = |n: usize| {
            let g = Grid::square(n, 6.0);
            let params = Params::from_fn(g, |x, y| 0.5 * (x * x + y * y), 0.0, 0.0);
            let u = retract(&Field::from_fn(g, |x, y| {
                Complex64::new((-(x * x + y * y) / (2.0 * 2.0f64.sqrt())).exp(), 0.0)
            }))
            .unwrap();
            (energy(&u, &params).total - 2.0f64.sqrt() / 2.0).abs()
        };
        let ratio = err_at(63) / err_at(127);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }
}
