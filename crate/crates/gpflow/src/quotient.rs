//! Phase-equivalence error metrics.
//!
//! The energy is invariant under a global phase, so convergence is
//! measured modulo `u ~ e^{iw} u`: align the phase first, then take the
//! norm of the difference. The optimal phase has a closed form: with
//! `c = (u, v)_X`, the minimum of `||u - e^{iw} v||_X` over `w` is reached
//! at `w = -arg(c)` with squared value `||u||^2 + ||v||^2 - 2|c|`.
//!
//! The distance itself is evaluated on the explicitly aligned difference
//! `u - e^{iw*} v` rather than through that identity: the subtraction of
//! near-equal norms floors at ~1e-8 in f64, while the aligned difference
//! resolves distances down to machine precision.

use num_complex::Complex64;

use crate::error::{GpError, Result};
use crate::grid::{assert_same_grid, l2_inner, Field};
use crate::operators::apply_laplacian;

/// Which inner product the alignment minimizes over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignNorm {
    L2,
    H01,
}

/// Result of aligning `v` to `u`: the optimal phase and the residual
/// quotient distance.
#[derive(Debug, Clone, Copy)]
pub struct AlignedError {
    /// Minimizing phase in `[-pi, pi)`.
    pub omega_star: f64,
    /// `min_w ||u - e^{iw} v||`, nonnegative.
    pub rho: f64,
    pub which_norm: AlignNorm,
}

fn inner(u: &Field, v: &Field, norm: AlignNorm) -> Complex64 {
    match norm {
        AlignNorm::L2 => l2_inner(u, v),
        AlignNorm::H01 => l2_inner(u, &apply_laplacian(v)),
    }
}

fn wrap_phase(w: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = w.rem_euclid(2.0 * PI);
    if w >= PI {
        w -= 2.0 * PI;
    }
    w
}

/// Align `v` to `u` by a global phase in the chosen norm.
///
/// When the cross inner product vanishes every phase is optimal and
/// `omega_star` is 0 by convention.
pub fn align_phase(u: &Field, v: &Field, norm: AlignNorm) -> AlignedError {
    assert_same_grid(u, v);
    let c = inner(u, v, norm);
    let omega_star = if c == Complex64::ZERO {
        0.0
    } else {
        wrap_phase(-c.arg())
    };
    let mut diff = u.clone();
    diff.axpy(-Complex64::from_polar(1.0, omega_star), v);
    let rho = inner(&diff, &diff, norm).re.max(0.0).sqrt();
    AlignedError {
        omega_star,
        rho,
        which_norm: norm,
    }
}

/// The two quotient distances to a reference state: `rho1` in L2, `rho2`
/// in the H01 (kinetic) norm. The optimal phases are minimized
/// independently and may differ.
pub fn rho_pair(u: &Field, uref: &Field) -> (f64, f64) {
    (
        align_phase(u, uref, AlignNorm::L2).rho,
        align_phase(u, uref, AlignNorm::H01).rho,
    )
}

/// Average geometric convergence rate over the trailing `window` ratios:
/// `(errors[n] / errors[n - window])^{1/window}` for the last entry `n`.
pub fn estimate_rate(errors: &[f64], window: usize) -> Result<f64> {
    assert!(window >= 2, "rate window must be at least 2");
    if errors.len() < window + 1 {
        return Err(GpError::TooFewErrors {
            window,
            got: errors.len(),
        });
    }
    if let Some((index, value)) = errors
        .iter()
        .enumerate()
        .find(|(_, e)| !(**e > 0.0 && e.is_finite()))
    {
        return Err(GpError::NonPositiveError {
            index,
            value: *value,
        });
    }
    let last = errors.len() - 1;
    Ok((errors[last] / errors[last - window]).powf(1.0 / window as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{mass, Grid};
    use crate::operators::x_norm;
    use crate::testutil::random_field;

    #[test]
    fn aligning_a_pure_phase_shift_gives_zero_distance() {
        let g = Grid::square(8, 2.0);
        let u = random_field(g, 1);
        let v = u.scaled(Complex64::from_polar(1.0, 0.7));
        for norm in [AlignNorm::L2, AlignNorm::H01] {
            let a = align_phase(&u, &v, norm);
            assert!(a.rho < 1e-13, "{norm:?}: rho = {}", a.rho);
            assert!((a.omega_star - (-0.7)).abs() < 1e-12, "{}", a.omega_star);
        }
    }

    #[test]
    fn unit_mass_identity_for_rho_squared() {
        let g = Grid::square(7, 3.0);
        let u = crate::grid::retract(&random_field(g, 2)).unwrap();
        let v = crate::grid::retract(&random_field(g, 3)).unwrap();
        let a = align_phase(&u, &v, AlignNorm::L2);
        let expect = 2.0 - 2.0 * l2_inner(&u, &v).norm();
        assert!((a.rho * a.rho - expect).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_brute_force_scan() {
        let g = Grid::new(3, 3, 0.0, 4.0, 0.0, 4.0);
        let u = random_field(g, 4);
        let v = random_field(g, 5);
        let a = align_phase(&u, &v, AlignNorm::L2);
        let mut best = f64::INFINITY;
        let n = 1_000_000;
        for k in 0..n {
            let w = -std::f64::consts::PI
                + 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
            let mut diff = u.clone();
            diff.axpy(-Complex64::from_polar(1.0, w), &v);
            best = best.min(mass(&diff));
        }
        assert!((a.rho - best).abs() < 1e-6, "{} vs {best}", a.rho);
    }

    #[test]
    fn rho_pair_vanishes_on_equal_fields() {
        let g = Grid::square(6, 1.5);
        let u = random_field(g, 6);
        let (r1, r2) = rho_pair(&u, &u);
        assert!(r1 < 1e-13 && r2 < 1e-13);
    }

    #[test]
    fn quotient_distance_never_exceeds_the_plain_distance() {
        let g = Grid::square(8, 2.0);
        let zero_params =
            crate::operators::Params::new(g, vec![0.0; g.len()], 0.0, 0.0).unwrap();
        let h01 = crate::operators::assemble_metric(
            crate::operators::MetricKind::H01,
            g,
            &zero_params,
        );
        for seed in 0..20 {
            let u = random_field(g, 100 + seed);
            let v = random_field(g, 200 + seed);
            let mut diff = u.clone();
            diff.axpy(-Complex64::ONE, &v);
            let (r1, r2) = rho_pair(&u, &v);
            assert!(r1 <= mass(&diff) + 1e-12);
            assert!(r2 <= x_norm(&h01, &diff) + 1e-12);
        }
    }

    #[test]
    fn quotient_metric_axioms_hold_on_samples() {
        let g = Grid::square(5, 1.0);
        for seed in 0..100 {
            let u = random_field(g, 3 * seed + 1);
            let v = random_field(g, 3 * seed + 2);
            let w = random_field(g, 3 * seed + 3);
            let ruv = align_phase(&u, &v, AlignNorm::L2).rho;
            let rvu = align_phase(&v, &u, AlignNorm::L2).rho;
            assert!((ruv - rvu).abs() <= 1e-12 * ruv.max(1.0));
            let ruw = align_phase(&u, &w, AlignNorm::L2).rho;
            let rvw = align_phase(&v, &w, AlignNorm::L2).rho;
            assert!(ruw <= ruv + rvw + 1e-10);
        }
    }

    #[test]
    fn quotient_distance_is_phase_invariant_in_both_slots() {
        let g = Grid::square(6, 2.0);
        let u = random_field(g, 7);
        let v = random_field(g, 8);
        let base = align_phase(&u, &v, AlignNorm::L2).rho;
        let up = u.scaled(Complex64::from_polar(1.0, 1.9));
        let vp = v.scaled(Complex64::from_polar(1.0, -2.4));
        let shifted = align_phase(&up, &vp, AlignNorm::L2).rho;
        assert!((base - shifted).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn quotient_distance_scales_linearly() {
        let g = Grid::square(6, 2.0);
        let u = random_field(g, 9);
        let v = random_field(g, 10);
        let base = align_phase(&u, &v, AlignNorm::L2).rho;
        let alpha = 2.75;
        let scaled = align_phase(
            &u.scaled(Complex64::new(alpha, 0.0)),
            &v.scaled(Complex64::new(alpha, 0.0)),
            AlignNorm::L2,
        )
        .rho;
        assert!((scaled - alpha * base).abs() <= 1e-12 * (alpha * base).max(1.0));
    }

    #[test]
    fn rate_of_exact_geometric_sequence() {
        let errors: Vec<f64> = (0..=200).map(|n| 0.97f64.powi(n)).collect();
        let rate = estimate_rate(&errors, 100).unwrap();
        assert!((rate - 0.97).abs() < 1e-12);
    }

    #[test]
    fn rate_of_alternating_factors_is_their_geometric_mean() {
        // factors 0.9, 1.0, 0.9, 1.0, ... over an even window -> sqrt(0.9)
        let mut errors = vec![1.0];
        for n in 0..120 {
            let f = if n % 2 == 0 { 0.9 } else { 1.0 };
            errors.push(errors[errors.len() - 1] * f);
        }
        let rate = estimate_rate(&errors, 100).unwrap();
        assert!((rate - 0.9f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rate_rejects_bad_inputs() {
        assert!(matches!(
            estimate_rate(&[1.0, 0.9, 0.0, 0.7], 2),
            Err(GpError::NonPositiveError { index: 2, .. })
        ));
        assert!(matches!(
            estimate_rate(&[1.0, 0.9], 2),
            Err(GpError::TooFewErrors { .. })
        ));
    }
}
