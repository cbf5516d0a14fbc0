//! Action variables of the unperturbed problem.
//!
//! On the closed-orbit region with positive angular momentum, the two
//! action variables are
//!
//! ```text
//! I1 = A(h, L)/(2 pi) + L,      I2 = L,
//! ```
//!
//! where `A(h, L)` is the area enclosed by the orbit in the `(r, l)` plane.
//! Inverting gives the Hamiltonian as a function of the actions alone,
//!
//! ```text
//! K0(I) = m c^2 S / sqrt(S^2 + alpha^2/c^2),
//! S(I)  = I1 - I2 + sqrt(c^2 I2^2 - alpha^2)/c,
//! ```
//!
//! whose gradient carries the orbit frequencies and whose Hessian
//! determinant is strictly positive: the twist condition that isolates the
//! resonant tori under perturbation. Negative angular momenta are handled
//! by the reflection symmetry, so all formulas here are evaluated at `|L|`.

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::dynamics::PhysParams;
use crate::error::{Error, Result, Violation};
use crate::unperturbed::{angular_ratio, apsidal_angle, classify, require_closed_non_circular};

/// The action pair. Valid actions satisfy `I1 - I2 > 0` and
/// `c^2 I2^2 - alpha^2 > 0`, and map back into the closed-orbit regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Actions {
    pub i1: f64,
    pub i2: f64,
}

impl Actions {
    pub fn new(i1: f64, i2: f64) -> Self {
        Self { i1, i2 }
    }
}

fn validate_actions(actions: &Actions, params: &PhysParams) -> Result<()> {
    let diff = actions.i1 - actions.i2;
    if !(diff > 0.0) {
        return Err(Error::Domain(Violation::new("I1 - I2 > 0", diff, 0.0)));
    }
    let c2i2 = params.c * params.c * actions.i2 * actions.i2;
    let a2 = params.alpha * params.alpha;
    if !(c2i2 > a2) || actions.i2 <= 0.0 {
        return Err(Error::Domain(Violation::new(
            "c^2 I2^2 - alpha^2 > 0, I2 > 0",
            c2i2,
            a2,
        )));
    }
    Ok(())
}

/// `S(I) = I1 - I2 + sqrt(c^2 I2^2 - alpha^2)/c`, the quantity the
/// action Hamiltonian depends on.
fn action_scalar(actions: &Actions, params: &PhysParams) -> f64 {
    let c = params.c;
    actions.i1 - actions.i2 + (c * c * actions.i2 * actions.i2 - params.alpha * params.alpha).sqrt() / c
}

/// `dS/dI2 = -1 + c I2 / sqrt(c^2 I2^2 - alpha^2)`.
fn action_scalar_d2(actions: &Actions, params: &PhysParams) -> f64 {
    let c = params.c;
    let root = (c * c * actions.i2 * actions.i2 - params.alpha * params.alpha).sqrt();
    -1.0 + c * actions.i2 / root
}

/// `d^2 S/dI2^2 = -c alpha^2 / (c^2 I2^2 - alpha^2)^(3/2)`.
fn action_scalar_d22(actions: &Actions, params: &PhysParams) -> f64 {
    let c = params.c;
    let base = c * c * actions.i2 * actions.i2 - params.alpha * params.alpha;
    -c * params.alpha * params.alpha / base.powf(1.5)
}

/// Area of the region enclosed by the orbit in the `(r, l)` plane:
/// `A(h, L) = (2 pi / c) (alpha h / sqrt(m^2 c^4 - h^2) - sqrt(c^2 L^2 - alpha^2))`.
/// Evaluated at `|L|`; positive in the closed-orbit regime and vanishing at
/// the circular boundary.
pub fn phase_area(h: f64, l: f64, params: &PhysParams) -> Result<f64> {
    let l = l.abs();
    require_closed_non_circular(h, l, params)?;
    let (c, alpha) = (params.c, params.alpha);
    let m2c4 = params.rest_energy().powi(2);
    Ok(std::f64::consts::TAU / c
        * (alpha * h / (m2c4 - h * h).sqrt() - (c * c * l * l - alpha * alpha).sqrt()))
}

/// The action map `(h, L) -> (I1, I2)`, evaluated at `|L|`.
pub fn actions_from(h: f64, l: f64, params: &PhysParams) -> Result<Actions> {
    let l = l.abs();
    let area = phase_area(h, l, params)?;
    Ok(Actions {
        i1: area / std::f64::consts::TAU + l,
        i2: l,
    })
}

/// Inverse of the action map: `L = I2` exactly, and `h` in closed form from
/// inverting the enclosed-area relation. The returned `h` equals
/// [`action_hamiltonian`] of the same actions.
pub fn energy_momentum_from_actions(actions: &Actions, params: &PhysParams) -> Result<(f64, f64)> {
    validate_actions(actions, params)?;
    let h = action_hamiltonian_unchecked(actions, params);
    // Image check: the inverse must land back in the closed-orbit regime.
    if !classify(h, actions.i2, params).is_closed_non_circular() {
        return Err(Error::Domain(Violation::new(
            "actions map into the closed-orbit regime",
            h,
            params.rest_energy(),
        )));
    }
    Ok((h, actions.i2))
}

fn action_hamiltonian_unchecked(actions: &Actions, params: &PhysParams) -> f64 {
    let s = action_scalar(actions, params);
    let a_over_c = params.alpha / params.c;
    params.rest_energy() * s / (s * s + a_over_c * a_over_c).sqrt()
}

/// The Hamiltonian in action variables,
/// `K0(I) = m c^2 S / sqrt(S^2 + alpha^2/c^2)`. Satisfies
/// `K0(actions_from(h, L)) = h` and takes values in `(0, m c^2)`.
pub fn action_hamiltonian(actions: &Actions, params: &PhysParams) -> Result<f64> {
    validate_actions(actions, params)?;
    Ok(action_hamiltonian_unchecked(actions, params))
}

/// Analytic gradient of [`action_hamiltonian`]. The first component is the
/// radial frequency `2 pi / T_h`; the second is
/// `(2 pi / T_h) (apsidal_angle/(2 pi) - 1)`.
pub fn action_hamiltonian_grad(actions: &Actions, params: &PhysParams) -> Result<Vector2<f64>> {
    validate_actions(actions, params)?;
    let s = action_scalar(actions, params);
    let a_over_c = params.alpha / params.c;
    let a2 = a_over_c * a_over_c;
    // dK0/dS = m c^2 (alpha/c)^2 / (S^2 + (alpha/c)^2)^(3/2)
    let dk_ds = params.rest_energy() * a2 / (s * s + a2).powf(1.5);
    let s2 = action_scalar_d2(actions, params);
    Ok(Vector2::new(dk_ds, dk_ds * s2))
}

/// Analytic Hessian of [`action_hamiltonian`]:
///
/// ```text
/// m alpha^2 / (S^2 + alpha^2/c^2)^(5/2) *
///   [ -3 S                -3 S S'
///     -3 S S'             -3 S S'^2 + (S^2 + alpha^2/c^2) S'' ]
/// ```
///
/// with `S' = dS/dI2`, `S'' = d^2 S/dI2^2`. Entry (1,1) is strictly
/// negative on the valid domain.
pub fn action_hamiltonian_hess(actions: &Actions, params: &PhysParams) -> Result<Matrix2<f64>> {
    validate_actions(actions, params)?;
    let s = action_scalar(actions, params);
    let s2 = action_scalar_d2(actions, params);
    let s22 = action_scalar_d22(actions, params);
    let a_over_c = params.alpha / params.c;
    let a2 = a_over_c * a_over_c;
    let denom = (s * s + a2).powf(2.5);
    let scale = params.m * params.alpha * params.alpha / denom;
    let h11 = -3.0 * s;
    let h12 = -3.0 * s * s2;
    let h22 = -3.0 * s * s2 * s2 + (s * s + a2) * s22;
    Ok(Matrix2::new(h11, h12, h12, h22) * scale)
}

/// Closed-form determinant of the action Hessian,
/// `3 m^2 c alpha^6 S / ((S^2 + alpha^2/c^2)^4 (c^2 I2^2 - alpha^2)^(3/2))`,
/// strictly positive on the valid domain: the twist condition.
pub fn action_hamiltonian_hess_det(actions: &Actions, params: &PhysParams) -> Result<f64> {
    validate_actions(actions, params)?;
    let s = action_scalar(actions, params);
    let a_over_c = params.alpha / params.c;
    let a2 = a_over_c * a_over_c;
    let c = params.c;
    let base = c * c * actions.i2 * actions.i2 - params.alpha * params.alpha;
    Ok(3.0 * params.m * params.m * c * params.alpha.powi(6) * s
        / ((s * s + a2).powi(4) * base.powf(1.5)))
}

/// Non-relativistic reference quantities for a closed orbit at `(h, L)`:
/// the energy shift from rest energy, the Kepler third-law period at that
/// shift, the apsidal angle, and the denominator coefficients of the
/// limiting Keplerian ellipse
/// `rho = L^2 / (sqrt(alpha^2 m^2 + 2 m E L^2) cos(theta - theta0) + alpha m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonRelLimits {
    /// `E = H0 - m c^2`, converging to the Newtonian energy.
    pub energy_shift: f64,
    /// The angular momentum (Newtonian limit of `L`).
    pub ang_mom: f64,
    /// Kepler third-law period `2 pi alpha sqrt(m) / (-2 E)^(3/2)`.
    pub kepler_period: f64,
    /// Relativistic apsidal angle at this `L` (tends to `2 pi`).
    pub apsidal_angle: f64,
    /// Limiting ellipse coefficient `sqrt(alpha^2 m^2 + 2 m E L^2)/L^2`.
    pub ellipse_amplitude: f64,
    /// Limiting ellipse coefficient `alpha m / L^2`.
    pub ellipse_offset: f64,
}

/// Compute [`NonRelLimits`] for a closed orbit. The orbit must be in the
/// closed regime at the given parameters and have negative energy shift.
pub fn nonrel_limits(h: f64, l: f64, params: &PhysParams) -> Result<NonRelLimits> {
    let l = l.abs();
    require_closed_non_circular(h, l, params)?;
    let energy_shift = h - params.rest_energy();
    if !(energy_shift < 0.0) {
        return Err(Error::Domain(Violation::new(
            "E = h - m c^2 < 0",
            energy_shift,
            0.0,
        )));
    }
    let radicand = params.alpha * params.alpha * params.m * params.m
        + 2.0 * params.m * energy_shift * l * l;
    if !(radicand > 0.0) {
        return Err(Error::Domain(Violation::new(
            "alpha^2 m^2 + 2 m E L^2 > 0",
            radicand,
            0.0,
        )));
    }
    Ok(NonRelLimits {
        energy_shift,
        ang_mom: l,
        kepler_period: std::f64::consts::TAU * params.alpha * params.m.sqrt()
            / (-2.0 * energy_shift).powf(1.5),
        apsidal_angle: apsidal_angle(l, params)?,
        ellipse_amplitude: radicand.sqrt() / (l * l),
        ellipse_offset: params.alpha * params.m / (l * l),
    })
}

/// Frequency identity connecting the gradient components:
/// `dK0/dI2 / dK0/dI1 = apsidal_angle(I2)/(2 pi) - 1`.
pub fn frequency_ratio(actions: &Actions, params: &PhysParams) -> Result<f64> {
    validate_actions(actions, params)?;
    Ok(1.0 / angular_ratio(actions.i2, params)? - 1.0)
}

// Re-exported for the torus resonance tests below.
pub use crate::unperturbed::TorusLabel;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unperturbed::{polar_orbit_shape, radial_period};
    use std::f64::consts::{PI, TAU};

    const FIG1_H: f64 = 0.7;
    const FIG1_L: f64 = 1.2;

    fn params() -> PhysParams {
        PhysParams::normalized()
    }

    /// Midpoint-rule oracle for the enclosed area, `2 Int sqrt(phi(u)) du`.
    fn area_oracle(h: f64, l: f64, p: &PhysParams) -> f64 {
        use crate::unperturbed::{radial_bounds, radial_momentum_sq};
        let (r_min, r_max) = radial_bounds(h, l, p).unwrap();
        let n = 200_000;
        let dr = (r_max - r_min) / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let r = r_min + (i as f64 + 0.5) * dr;
            acc += radial_momentum_sq(r, h, l, p).unwrap().max(0.0).sqrt();
        }
        2.0 * acc * dr
    }

    #[test]
    fn phase_area_figure_value() {
        let p = params();
        let area = phase_area(FIG1_H, FIG1_L, &p).unwrap();
        assert!((area - 1.990960).abs() < 1e-6, "area = {area}");
        let oracle = area_oracle(FIG1_H, FIG1_L, &p);
        assert!((area - oracle).abs() < 1e-5, "{area} vs oracle {oracle}");
    }

    #[test]
    fn phase_area_vanishes_at_circular_limit() {
        let p = params();
        let l2_top = 1.0 / (1.0 - FIG1_H * FIG1_H);
        let l = (l2_top * (1.0 - 1e-12)).sqrt();
        let area = phase_area(FIG1_H, l, &p).unwrap();
        assert!(area.abs() < 1e-5, "area = {area}");
    }

    #[test]
    fn phase_area_decreasing_in_ang_mom() {
        let p = params();
        let upper = (1.0 / (1.0 - FIG1_H * FIG1_H)).sqrt();
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let l = 1.0 + (upper - 1.0) * (0.05 + 0.9 * i as f64 / 19.0);
            let area = phase_area(FIG1_H, l, &p).unwrap();
            assert!(area < prev);
            prev = area;
        }
    }

    #[test]
    fn actions_figure_value() {
        let p = params();
        let actions = actions_from(FIG1_H, FIG1_L, &p).unwrap();
        assert!((actions.i1 - 1.516871).abs() < 1e-6);
        assert_eq!(actions.i2, FIG1_L);
    }

    #[test]
    fn actions_circular_limit() {
        let p = params();
        let l2_top = 1.0 / (1.0 - FIG1_H * FIG1_H);
        let l = (l2_top * (1.0 - 1e-12)).sqrt();
        let actions = actions_from(FIG1_H, l, &p).unwrap();
        assert!((actions.i1 - l).abs() < 1e-5);
    }

    #[test]
    fn action_round_trip_grid() {
        let p = params();
        for i in 0..10 {
            let h = 0.2 + 0.07 * i as f64;
            let upper = (1.0 / (1.0 - h * h)).sqrt();
            for j in 0..10 {
                let l = 1.0 + (upper - 1.0) * (0.08 + 0.84 * j as f64 / 9.0);
                let actions = actions_from(h, l, &p).unwrap();
                let (h2, l2) = energy_momentum_from_actions(&actions, &p).unwrap();
                assert!((h2 - h).abs() < 1e-12, "h = {h}, round trip {h2}");
                assert_eq!(l2, l);
                let k0 = action_hamiltonian(&actions, &p).unwrap();
                assert!((k0 - h).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_frozen_value() {
        let p = params();
        let actions = Actions::new(1.516871, 1.2);
        let (h, l) = energy_momentum_from_actions(&actions, &p).unwrap();
        assert!((h - 0.7).abs() < 1e-5);
        assert_eq!(l, 1.2);
    }

    #[test]
    fn action_hamiltonian_frozen_value() {
        // S = 0.980196, denominator sqrt(1.960784...).
        let p = params();
        let k0 = action_hamiltonian(&Actions::new(1.516871, 1.2), &p).unwrap();
        assert!((k0 - 0.7).abs() < 1e-5, "K0 = {k0}");
    }

    #[test]
    fn action_hamiltonian_range() {
        let p = params();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let h = 0.05 + 0.9 * rand();
            let upper = (1.0 / (1.0 - h * h)).sqrt();
            let l = 1.0 + (upper - 1.0) * (0.05 + 0.9 * rand());
            let actions = actions_from(h, l, &p).unwrap();
            let k0 = action_hamiltonian(&actions, &p).unwrap();
            assert!(k0 > 0.0 && k0 < p.rest_energy());
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = params();
        let actions = Actions::new(1.516871, 1.2);
        let grad = action_hamiltonian_grad(&actions, &p).unwrap();
        assert!((grad[0] - 0.364213).abs() < 1e-4);
        assert!((grad[1] - 0.294674).abs() < 1e-4);
        let h = 1e-6;
        for j in 0..2 {
            let mut ap = actions;
            let mut am = actions;
            if j == 0 {
                ap.i1 += h;
                am.i1 -= h;
            } else {
                ap.i2 += h;
                am.i2 -= h;
            }
            let fd = (action_hamiltonian(&ap, &p).unwrap() - action_hamiltonian(&am, &p).unwrap())
                / (2.0 * h);
            assert!((grad[j] - fd).abs() < 1e-5, "component {j}: {} vs {fd}", grad[j]);
        }
    }

    #[test]
    fn gradient_first_component_is_radial_frequency() {
        let p = params();
        for i in 0..8 {
            let h = 0.25 + 0.08 * i as f64;
            let upper = (1.0 / (1.0 - h * h)).sqrt();
            for frac in [0.2, 0.5, 0.8] {
                let l = 1.0 + (upper - 1.0) * frac;
                let actions = actions_from(h, l, &p).unwrap();
                let grad = action_hamiltonian_grad(&actions, &p).unwrap();
                let k0 = action_hamiltonian(&actions, &p).unwrap();
                let freq = TAU / radial_period(k0, &p).unwrap();
                assert!((grad[0] - freq).abs() < 1e-9, "h={h} L={l}");
            }
        }
    }

    #[test]
    fn resonance_identity_on_tori() {
        // At the torus actions, T grad K0 = 2 pi (n, k - n).
        let p = params();
        let t = 20.0 * PI;
        for (n, k) in [(1u32, 2u32), (1, 3), (1, 5), (2, 3), (2, 5), (3, 5), (3, 7), (4, 7), (5, 9), (1, 4)] {
            let Ok(torus) = TorusLabel::new(t, n, k, 1, &p) else {
                continue;
            };
            let actions = actions_from(torus.h, torus.abs_ang_mom(), &p).unwrap();
            let grad = action_hamiltonian_grad(&actions, &p).unwrap();
            let rv = grad * t / TAU;
            assert!((rv[0] - n as f64).abs() < 1e-8, "(n,k)=({n},{k}): {}", rv[0]);
            assert!((rv[1] - (k - n) as f64).abs() < 1e-8, "(n,k)=({n},{k}): {}", rv[1]);
        }
    }

    #[test]
    fn minimality_of_resonant_period() {
        // T is the smallest positive time with T grad K0 in 2 pi Z^2:
        // every proper fraction T/j must fail for j = 2..10.
        let p = params();
        let t = 20.0 * PI;
        let torus = TorusLabel::new(t, 1, 2, 1, &p).unwrap();
        let actions = actions_from(torus.h, torus.abs_ang_mom(), &p).unwrap();
        let grad = action_hamiltonian_grad(&actions, &p).unwrap();
        for j in 2..=10 {
            let tv = grad * (t / j as f64) / TAU;
            let integral =
                (tv[0] - tv[0].round()).abs() < 1e-6 && (tv[1] - tv[1].round()).abs() < 1e-6;
            assert!(!integral, "T/{j} is also resonant");
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let p = params();
        let grid = [
            Actions::new(1.516871, 1.2),
            Actions::new(1.8, 1.1),
            Actions::new(2.5, 1.6),
            Actions::new(3.0, 2.2),
        ];
        let h = 1e-5;
        for actions in grid {
            let hess = action_hamiltonian_hess(&actions, &p).unwrap();
            assert_eq!(hess[(0, 1)], hess[(1, 0)]);
            assert!(hess[(0, 0)] < 0.0);
            for j in 0..2 {
                let mut ap = actions;
                let mut am = actions;
                if j == 0 {
                    ap.i1 += h;
                    am.i1 -= h;
                } else {
                    ap.i2 += h;
                    am.i2 -= h;
                }
                let gp = action_hamiltonian_grad(&ap, &p).unwrap();
                let gm = action_hamiltonian_grad(&am, &p).unwrap();
                for i in 0..2 {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    assert!(
                        (hess[(i, j)] - fd).abs() < 1e-5,
                        "entry ({i},{j}): {} vs {fd}",
                        hess[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn hessian_determinant_frozen_value() {
        let p = params();
        let actions = Actions::new(1.516871, 1.2);
        let det = action_hamiltonian_hess_det(&actions, &p).unwrap();
        assert!((det - 0.6816).abs() < 1e-3, "det = {det}");
        let fd_det = action_hamiltonian_hess(&actions, &p).unwrap().determinant();
        assert!(((det - fd_det) / det).abs() < 1e-9);
    }

    #[test]
    fn hessian_determinant_positive_on_grid() {
        let p = params();
        let mut count = 0;
        for i in 0..50 {
            let h = 0.05 + 0.89 * i as f64 / 49.0;
            let upper = (1.0 / (1.0 - h * h)).sqrt();
            for j in 0..50 {
                let l = 1.0 + (upper - 1.0) * (0.03 + 0.93 * j as f64 / 49.0);
                let actions = actions_from(h, l, &p).unwrap();
                let det = action_hamiltonian_hess_det(&actions, &p).unwrap();
                assert!(det > 0.0, "h={h} L={l}");
                let direct = action_hamiltonian_hess(&actions, &p).unwrap().determinant();
                assert!(((det - direct) / det).abs() < 1e-9);
                count += 1;
            }
        }
        assert_eq!(count, 2500);
    }

    #[test]
    fn frequency_identity() {
        let p = params();
        for i in 0..10 {
            let h = 0.2 + 0.07 * i as f64;
            let upper = (1.0 / (1.0 - h * h)).sqrt();
            let l = 1.0 + (upper - 1.0) * 0.5;
            let actions = actions_from(h, l, &p).unwrap();
            let grad = action_hamiltonian_grad(&actions, &p).unwrap();
            let lhs = grad[1] / grad[0];
            let rhs = apsidal_angle(l, &p).unwrap() / TAU - 1.0;
            assert!((lhs - rhs).abs() < 1e-10, "h = {h}");
            assert!((frequency_ratio(&actions, &p).unwrap() - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_actions_rejected() {
        let p = params();
        assert!(action_hamiltonian(&Actions::new(1.0, 1.2), &p).is_err());
        assert!(action_hamiltonian(&Actions::new(2.0, 0.5), &p).is_err());
        assert!(action_hamiltonian(&Actions::new(2.0, -1.2), &p).is_err());
    }

    #[test]
    fn apsidal_angle_converges_quadratically_in_c() {
        // Log-log slope of apsidal_angle - 2 pi against c must be -2.
        let l_per_alpha = 1.2;
        let mut gaps = Vec::new();
        for c in [10.0, 100.0, 1000.0] {
            let p = PhysParams::new(1.0, c, 1.0).unwrap();
            let gap = apsidal_angle(l_per_alpha * p.alpha, &p).unwrap() - TAU;
            gaps.push((c, gap));
        }
        let slope = (gaps[0].1 / gaps[2].1).ln() / (gaps[2].0 / gaps[0].0).ln();
        assert!((slope - 2.0).abs() < 0.1, "slope = {slope}");
    }

    #[test]
    fn radial_period_converges_to_kepler() {
        // Hold E = h - m c^2 fixed and compare against the third-law value.
        let e_nr = -0.1;
        let l = 1.2;
        for (c, tol) in [(100.0, 1e-2), (1000.0, 1e-4)] {
            let p = PhysParams::new(1.0, c, 1.0).unwrap();
            let h = p.rest_energy() + e_nr;
            let limits = nonrel_limits(h, l, &p).unwrap();
            let t_rel = radial_period(h, &p).unwrap();
            let gap = ((t_rel - limits.kepler_period) / limits.kepler_period).abs();
            assert!(gap < tol, "c = {c}: gap {gap}");
        }
    }

    #[test]
    fn ellipse_coefficients_converge() {
        let e_nr = -0.1;
        let l = 1.2;
        let p = PhysParams::new(1.0, 1000.0, 1.0).unwrap();
        let h = p.rest_energy() + e_nr;
        let limits = nonrel_limits(h, l, &p).unwrap();
        let shape = polar_orbit_shape(h, l, &p).unwrap();
        assert!(((shape.amplitude - limits.ellipse_amplitude) / limits.ellipse_amplitude).abs() < 1e-4);
        assert!(((shape.offset - limits.ellipse_offset) / limits.ellipse_offset).abs() < 1e-4);
        // Frozen targets: sqrt(1 - 0.288)/1.44 and 1/1.44.
        assert!((limits.ellipse_amplitude - 0.585973).abs() < 1e-5);
        assert!((limits.ellipse_offset - 1.0 / 1.44).abs() < 1e-12);
    }
}
