//! Phase space of the planar relativistic Kepler problem.
//!
//! The equation of motion for a particle of mass `m` in an attractive `1/r`
//! potential with coupling `alpha`, at speed-of-light `c`, is written as a
//! first-order Hamiltonian system in the conjugate pair `(x, p)` with
//!
//! ```text
//! H0(x, p) = m c^2 sqrt(1 + |p|^2 / (m^2 c^2)) - alpha / |x|.
//! ```
//!
//! This module holds the parameter set, the Cartesian and polar phase-space
//! representations, the Legendre transform between velocity and momentum,
//! the two first integrals, and the (optionally time-periodically forced)
//! vector field together with its state Jacobian.

use nalgebra::{Matrix2, Matrix4, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perturbation::PerturbationSpec;

/// Physical constants of the system: mass `m`, speed of light `c` and
/// coupling strength `alpha`, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub m: f64,
    pub c: f64,
    pub alpha: f64,
}

impl PhysParams {
    pub fn new(m: f64, c: f64, alpha: f64) -> Result<Self> {
        for (name, value) in [("m", m), ("c", c), ("alpha", alpha)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParam { name, value });
            }
        }
        Ok(Self { m, c, alpha })
    }

    /// `m = c = alpha = 1`, the normalization used throughout the examples.
    pub fn normalized() -> Self {
        Self {
            m: 1.0,
            c: 1.0,
            alpha: 1.0,
        }
    }

    /// Rest energy `m c^2`.
    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        Self::normalized()
    }
}

/// Phase-space point in Cartesian coordinates: position `x` (away from the
/// origin) and conjugate momentum `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub x: Vector2<f64>,
    pub p: Vector2<f64>,
}

impl CartesianState {
    pub fn new(x: Vector2<f64>, p: Vector2<f64>) -> Self {
        Self { x, p }
    }

    pub fn from_coords(x1: f64, x2: f64, p1: f64, p2: f64) -> Self {
        Self {
            x: Vector2::new(x1, x2),
            p: Vector2::new(p1, p2),
        }
    }

    pub fn radius(&self) -> f64 {
        self.x.norm()
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x[0], self.x[1], self.p[0], self.p[1]]
    }

    pub fn from_array(z: &[f64; 4]) -> Self {
        Self::from_coords(z[0], z[1], z[2], z[3])
    }

    /// Componentwise sup-norm distance to another state.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter()
            .zip(b.iter())
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    }

    /// Lexicographic order on `(x1, x2, p1, p2)`, used for deterministic
    /// tie-breaking.
    pub fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.to_array();
        let b = other.to_array();
        for (u, v) in a.iter().zip(b.iter()) {
            match u.total_cmp(v) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    }
}

/// Phase-space point in polar coordinates: radius `r > 0`, angle `theta`
/// (unwrapped, a plain real number), linear momentum `l` and angular
/// momentum `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    pub r: f64,
    pub theta: f64,
    pub l: f64,
    pub phi: f64,
}

impl PolarState {
    pub fn new(r: f64, theta: f64, l: f64, phi: f64) -> Self {
        Self { r, theta, l, phi }
    }
}

/// Time derivative of a polar state under the unperturbed flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarDeriv {
    pub r_dot: f64,
    pub theta_dot: f64,
    pub l_dot: f64,
    pub phi_dot: f64,
}

/// The symplectic rotation J = ((0, 1), (-1, 0)). With this convention,
/// counter-clockwise circular motion has positive angular momentum.
pub fn symplectic_j() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Lorentz factor as a function of momentum: `sqrt(1 + |p|^2/(m^2 c^2))`.
pub fn gamma_of_momentum(p: &Vector2<f64>, params: &PhysParams) -> f64 {
    let mc = params.m * params.c;
    (1.0 + p.norm_squared() / (mc * mc)).sqrt()
}

/// Legendre transform velocity -> momentum: `p = m xdot / sqrt(1 - |xdot|^2/c^2)`.
///
/// Fails for `|xdot| >= c`.
pub fn momentum_from_velocity(xdot: &Vector2<f64>, params: &PhysParams) -> Result<Vector2<f64>> {
    let speed2 = xdot.norm_squared();
    let c2 = params.c * params.c;
    if speed2 >= c2 {
        return Err(Error::Superluminal {
            speed: speed2.sqrt(),
            c: params.c,
        });
    }
    let factor = params.m / (1.0 - speed2 / c2).sqrt();
    Ok(xdot * factor)
}

/// Inverse Legendre transform momentum -> velocity:
/// `xdot = p / (m sqrt(1 + |p|^2/(m^2 c^2)))`. Defined for every `p`, and
/// the result always satisfies `|xdot| < c`.
pub fn velocity_from_momentum(p: &Vector2<f64>, params: &PhysParams) -> Vector2<f64> {
    p / (params.m * gamma_of_momentum(p, params))
}

/// The Hamiltonian `H0 = m c^2 sqrt(1 + |p|^2/(m^2 c^2)) - alpha/|x|`.
pub fn hamiltonian(state: &CartesianState, params: &PhysParams) -> Result<f64> {
    let r = state.radius();
    if r == 0.0 {
        return Err(Error::OriginState);
    }
    Ok(params.rest_energy() * gamma_of_momentum(&state.p, params) - params.alpha / r)
}

/// The angular momentum first integral `L0 = <x, J p> = x1 p2 - x2 p1`.
pub fn angular_momentum(state: &CartesianState) -> f64 {
    state.x[0] * state.p[1] - state.x[1] * state.p[0]
}

/// Polar Hamiltonian `m c^2 sqrt(1 + (l^2 + phi^2/r^2)/(m^2 c^2)) - alpha/r`.
pub fn polar_hamiltonian(polar: &PolarState, params: &PhysParams) -> Result<f64> {
    if polar.r <= 0.0 {
        return Err(Error::OriginState);
    }
    let mc = params.m * params.c;
    let kin = polar.l * polar.l + (polar.phi / polar.r).powi(2);
    Ok(params.rest_energy() * (1.0 + kin / (mc * mc)).sqrt() - params.alpha / polar.r)
}

/// Cartesian -> polar change of variables. The returned angle is the
/// principal value in `(-pi, pi]`; unwrapped angles are a property of
/// trajectories, not of single states.
pub fn to_polar(state: &CartesianState) -> Result<PolarState> {
    let r = state.radius();
    if r == 0.0 {
        return Err(Error::OriginState);
    }
    let theta = state.x[1].atan2(state.x[0]);
    let l = state.x.dot(&state.p) / r;
    let phi = angular_momentum(state);
    Ok(PolarState { r, theta, l, phi })
}

/// Polar -> Cartesian change of variables:
/// `x = r e^{i theta}`, `p = l e^{i theta} + (phi/r) i e^{i theta}`.
pub fn to_cartesian(polar: &PolarState) -> Result<CartesianState> {
    if polar.r <= 0.0 {
        return Err(Error::Domain(crate::error::Violation::new(
            "r > 0", polar.r, 0.0,
        )));
    }
    let (sin_t, cos_t) = polar.theta.sin_cos();
    let radial = Vector2::new(cos_t, sin_t);
    let tangential = Vector2::new(-sin_t, cos_t);
    Ok(CartesianState {
        x: radial * polar.r,
        p: radial * polar.l + tangential * (polar.phi / polar.r),
    })
}

/// Right-hand side of the (possibly perturbed) equations of motion:
/// `xdot = p/(m gamma)`, `pdot = -alpha x/|x|^3 + eps grad_x U(t, x)`.
///
/// With `eps = 0` the perturbation is not evaluated at all, so the field
/// reduces exactly to the unperturbed one.
pub fn vector_field(
    t: f64,
    state: &CartesianState,
    params: &PhysParams,
    eps: f64,
    pert: &PerturbationSpec,
) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let r = state.radius();
    if r == 0.0 {
        return Err(Error::OriginState);
    }
    let xdot = velocity_from_momentum(&state.p, params);
    let mut pdot = state.x * (-params.alpha / (r * r * r));
    if eps != 0.0 {
        pdot += pert.gradient(t, &state.x)? * eps;
    }
    Ok((xdot, pdot))
}

/// Right-hand side of the unperturbed flow in polar coordinates.
pub fn polar_vector_field(polar: &PolarState, params: &PhysParams) -> Result<PolarDeriv> {
    if polar.r <= 0.0 {
        return Err(Error::OriginState);
    }
    let mc = params.m * params.c;
    let kin = polar.l * polar.l + (polar.phi / polar.r).powi(2);
    let gamma = (1.0 + kin / (mc * mc)).sqrt();
    let mg = params.m * gamma;
    Ok(PolarDeriv {
        r_dot: polar.l / mg,
        theta_dot: polar.phi / (mg * polar.r * polar.r),
        l_dot: polar.phi * polar.phi / (mg * polar.r.powi(3)) - params.alpha / (polar.r * polar.r),
        phi_dot: 0.0,
    })
}

/// Jacobian of `velocity_from_momentum` with respect to `p`.
pub fn velocity_jacobian(p: &Vector2<f64>, params: &PhysParams) -> Matrix2<f64> {
    let mc = params.m * params.c;
    let gamma = gamma_of_momentum(p, params);
    let mg = params.m * gamma;
    let outer = p * p.transpose();
    Matrix2::identity() / mg - outer / (mg * gamma * gamma * mc * mc)
}

/// Jacobian of the Kepler force `-alpha x/|x|^3` with respect to `x`.
pub fn kepler_force_jacobian(x: &Vector2<f64>, params: &PhysParams) -> Matrix2<f64> {
    let r2 = x.norm_squared();
    let r = r2.sqrt();
    let r3 = r2 * r;
    let outer = x * x.transpose();
    -params.alpha * (Matrix2::identity() / r3 - 3.0 * outer / (r3 * r2))
}

/// State Jacobian of [`vector_field`]: the 4x4 matrix
/// `[[0, dv/dp], [dF/dx + eps Hess_x U, 0]]` used by the variational
/// equations.
pub fn state_jacobian(
    t: f64,
    state: &CartesianState,
    params: &PhysParams,
    eps: f64,
    pert: &PerturbationSpec,
) -> Result<Matrix4<f64>> {
    if state.radius() == 0.0 {
        return Err(Error::OriginState);
    }
    let dv = velocity_jacobian(&state.p, params);
    let mut df = kepler_force_jacobian(&state.x, params);
    if eps != 0.0 {
        df += pert.hessian(t, &state.x)? * eps;
    }
    let mut jac = Matrix4::zeros();
    jac.view_mut((0, 2), (2, 2)).copy_from(&dv);
    jac.view_mut((2, 0), (2, 2)).copy_from(&df);
    Ok(jac)
}

/// Rotation of the whole phase-space point by angle `omega` (applied to both
/// the position and momentum blocks).
pub fn rotate_state(state: &CartesianState, omega: f64) -> CartesianState {
    let (s, c) = omega.sin_cos();
    let rot = Matrix2::new(c, -s, s, c);
    CartesianState {
        x: rot * state.x,
        p: rot * state.p,
    }
}

/// Reflection across the x1 axis: `(x1, x2, p1, p2) -> (x1, -x2, p1, -p2)`.
/// Conjugates counter-clockwise solutions to clockwise ones for
/// perturbations even in `x2`.
pub fn reflect_across_x1_axis(state: &CartesianState) -> CartesianState {
    CartesianState::from_coords(state.x[0], -state.x[1], state.p[0], -state.p[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn momentum_at_rest_is_zero() {
        let params = PhysParams::normalized();
        let p = momentum_from_velocity(&Vector2::zeros(), &params).unwrap();
        assert_eq!(p, Vector2::zeros());
    }

    #[test]
    fn momentum_of_six_tenths_c() {
        // 0.6/sqrt(1 - 0.36) = 0.75
        let params = PhysParams::normalized();
        let p = momentum_from_velocity(&Vector2::new(0.6, 0.0), &params).unwrap();
        assert!(close(p[0], 0.75, 1e-15));
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn velocity_of_momentum_inverts() {
        let params = PhysParams::normalized();
        assert_eq!(
            velocity_from_momentum(&Vector2::zeros(), &params),
            Vector2::zeros()
        );
        let v = velocity_from_momentum(&Vector2::new(0.75, 0.0), &params);
        assert!(close(v[0], 0.6, 1e-15));
    }

    #[test]
    fn superluminal_velocity_rejected() {
        let params = PhysParams::normalized();
        let err = momentum_from_velocity(&Vector2::new(1.0, 0.3), &params).unwrap_err();
        assert!(matches!(err, Error::Superluminal { .. }));
    }

    #[test]
    fn velocity_stays_subluminal_for_huge_momentum() {
        let params = PhysParams::normalized();
        let v = velocity_from_momentum(&Vector2::new(1e6, 0.0), &params);
        let speed = v.norm();
        assert!(speed < params.c);
        assert!(speed > 0.999999 * params.c);
    }

    #[test]
    fn hamiltonian_unit_circle_rest() {
        let params = PhysParams::normalized();
        let state = CartesianState::from_coords(1.0, 0.0, 0.0, 0.0);
        assert!(close(hamiltonian(&state, &params).unwrap(), 0.0, 1e-15));
    }

    #[test]
    fn hamiltonian_at_figure_pericenter() {
        // Pericenter of the h = 0.7, L = 1.2 orbit: (r, l, phi) = (0.36203, 0, 1.2).
        let params = PhysParams::normalized();
        let polar = PolarState::new(0.36203, 0.0, 0.0, 1.2);
        let state = to_cartesian(&polar).unwrap();
        let h = hamiltonian(&state, &params).unwrap();
        assert!(close(h, 0.7, 1e-4), "h = {h}");
    }

    #[test]
    fn hamiltonian_rejects_origin() {
        let params = PhysParams::normalized();
        let state = CartesianState::from_coords(0.0, 0.0, 1.0, 0.0);
        assert!(matches!(
            hamiltonian(&state, &params),
            Err(Error::OriginState)
        ));
    }

    #[test]
    fn angular_momentum_of_radial_momentum_vanishes() {
        let state = CartesianState::from_coords(1.0, 0.0, 1.0, 0.0);
        assert_eq!(angular_momentum(&state), 0.0);
    }

    #[test]
    fn angular_momentum_sign_convention() {
        // Counter-clockwise motion at x = (1, 0) has p along +x2 and L = +1;
        // the clockwise state has L = -1.
        let ccw = CartesianState::from_coords(1.0, 0.0, 0.0, 1.0);
        let cw = CartesianState::from_coords(1.0, 0.0, 0.0, -1.0);
        assert_eq!(angular_momentum(&ccw), 1.0);
        assert_eq!(angular_momentum(&cw), -1.0);
        assert_eq!(to_polar(&ccw).unwrap().phi, 1.0);
    }

    #[test]
    fn to_polar_radial_state() {
        let state = CartesianState::from_coords(2.0, 0.0, 3.0, 0.0);
        let polar = to_polar(&state).unwrap();
        assert_eq!(polar.r, 2.0);
        assert_eq!(polar.theta, 0.0);
        assert!(close(polar.l, 3.0, 1e-15));
        assert_eq!(polar.phi, 0.0);
    }

    #[test]
    fn unperturbed_field_on_unit_circle() {
        let params = PhysParams::normalized();
        let state = CartesianState::from_coords(1.0, 0.0, 0.0, 0.0);
        let (xdot, pdot) =
            vector_field(0.0, &state, &params, 0.0, &PerturbationSpec::none()).unwrap();
        assert_eq!(xdot, Vector2::zeros());
        assert!(close(pdot[0], -1.0, 1e-15));
        assert_eq!(pdot[1], 0.0);
    }

    #[test]
    fn cartesian_field_matches_polar_field() {
        // Push the Cartesian field through the polar change of variables and
        // compare against the polar Hamiltonian equations.
        let params = PhysParams::new(1.3, 2.0, 0.7).unwrap();
        let pert = PerturbationSpec::none();
        let samples = [
            PolarState::new(0.8, 0.3, 0.4, 1.1),
            PolarState::new(1.7, -2.0, -0.6, 0.9),
            PolarState::new(2.4, 1.2, 0.0, -1.4),
            PolarState::new(0.5, 2.9, 1.3, 0.2),
        ];
        for polar in samples {
            let state = to_cartesian(&polar).unwrap();
            let (xdot, pdot) = vector_field(0.0, &state, &params, 0.0, &pert).unwrap();
            let r = state.radius();
            let r_dot = state.x.dot(&xdot) / r;
            let theta_dot = (state.x[0] * xdot[1] - state.x[1] * xdot[0]) / (r * r);
            let l_dot = xdot.dot(&state.p) / r - state.x.dot(&xdot) * state.x.dot(&state.p)
                / (r * r * r)
                + state.x.dot(&pdot) / r;
            let phi_dot = xdot[0] * state.p[1] - xdot[1] * state.p[0] + state.x[0] * pdot[1]
                - state.x[1] * pdot[0];
            let polar_rhs = polar_vector_field(&polar, &params).unwrap();
            assert!(close(r_dot, polar_rhs.r_dot, 1e-10));
            assert!(close(theta_dot, polar_rhs.theta_dot, 1e-10));
            assert!(close(l_dot, polar_rhs.l_dot, 1e-10));
            assert!(close(phi_dot, polar_rhs.phi_dot, 1e-10));
        }
    }

    #[test]
    fn polar_map_jacobian_is_symplectic() {
        // Finite-difference Jacobian of (r, theta, l, phi) -> (x, p) must
        // satisfy J^T Omega J = Omega entrywise to 1e-9.
        let samples = [
            PolarState::new(0.9, 0.4, 0.3, 1.2),
            PolarState::new(2.1, -1.3, -0.8, 0.5),
            PolarState::new(1.4, 3.0, 0.6, -0.9),
        ];
        let mut omega = Matrix4::zeros();
        omega
            .view_mut((0, 2), (2, 2))
            .copy_from(&Matrix2::identity());
        omega
            .view_mut((2, 0), (2, 2))
            .copy_from(&(-Matrix2::identity()));
        for polar in samples {
            let h = 1e-6;
            let coords = [polar.r, polar.theta, polar.l, polar.phi];
            let mut jac = Matrix4::zeros();
            for j in 0..4 {
                let mut plus = coords;
                let mut minus = coords;
                plus[j] += h;
                minus[j] -= h;
                let zp = to_cartesian(&PolarState::new(plus[0], plus[1], plus[2], plus[3]))
                    .unwrap()
                    .to_array();
                let zm = to_cartesian(&PolarState::new(minus[0], minus[1], minus[2], minus[3]))
                    .unwrap()
                    .to_array();
                for i in 0..4 {
                    jac[(i, j)] = (zp[i] - zm[i]) / (2.0 * h);
                }
            }
            let form = jac.transpose() * omega * jac;
            let err = (form - omega).abs().max();
            assert!(err < 1e-9, "symplectic defect {err}");
        }
    }

    #[test]
    fn state_jacobian_matches_finite_differences() {
        let params = PhysParams::new(1.1, 1.9, 0.8).unwrap();
        let pert = PerturbationSpec::dipole_cos(0.7, 5.0).unwrap();
        let state = CartesianState::from_coords(1.2, -0.4, 0.3, 0.9);
        let t = 0.37;
        let eps = 0.01;
        let analytic = state_jacobian(t, &state, &params, eps, &pert).unwrap();
        let h = 1e-6;
        for j in 0..4 {
            let mut zp = state.to_array();
            let mut zm = state.to_array();
            zp[j] += h;
            zm[j] -= h;
            let fp = vector_field(t, &CartesianState::from_array(&zp), &params, eps, &pert)
                .map(|(a, b)| [a[0], a[1], b[0], b[1]])
                .unwrap();
            let fm = vector_field(t, &CartesianState::from_array(&zm), &params, eps, &pert)
                .map(|(a, b)| [a[0], a[1], b[0], b[1]])
                .unwrap();
            for i in 0..4 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                assert!(
                    close(analytic[(i, j)], fd, 1e-6),
                    "entry ({i},{j}): {} vs {fd}",
                    analytic[(i, j)]
                );
            }
        }
    }

    proptest! {
        #[test]
        fn velocity_momentum_round_trip(vx in -0.6f64..0.6, vy in -0.6f64..0.6) {
            // |v| < 0.85 c by construction.
            let params = PhysParams::normalized();
            let v = Vector2::new(vx, vy);
            let p = momentum_from_velocity(&v, &params).unwrap();
            let back = velocity_from_momentum(&p, &params);
            prop_assert!((back - v).norm() <= 1e-14 * (1.0 + v.norm()));
        }

        #[test]
        fn momentum_velocity_round_trip(
            px in -20.0f64..20.0,
            py in -20.0f64..20.0,
            scale in 0f64..3.0,
        ) {
            // Round-trip error grows like eps * (1 + |p|^2/(m c)^2) from the
            // 1 - |v|^2/c^2 cancellation, so the tolerance is scaled by the
            // squared momentum ratio.
            let params = PhysParams::normalized();
            let p = Vector2::new(px, py) * 10f64.powf(scale);
            let q2 = p.norm_squared() / (params.m * params.c).powi(2);
            let v = velocity_from_momentum(&p, &params);
            let back = momentum_from_velocity(&v, &params).unwrap();
            let tol = 1e-13 * (1.0 + q2) * p.norm().max(1.0);
            prop_assert!((back - p).norm() <= tol);
        }

        #[test]
        fn polar_round_trip(
            r in 0.05f64..50.0,
            theta in -3.1f64..3.1,
            l in -5.0f64..5.0,
            phi in -5.0f64..5.0,
        ) {
            let polar = PolarState::new(r, theta, l, phi);
            let state = to_cartesian(&polar).unwrap();
            let back = to_polar(&state).unwrap();
            prop_assert!((back.r - r).abs() <= 1e-13 * r.max(1.0));
            prop_assert!((back.theta - theta).abs() <= 1e-12);
            prop_assert!((back.l - l).abs() <= 1e-12 * (1.0 + l.abs()));
            prop_assert!((back.phi - phi).abs() <= 1e-12 * (1.0 + phi.abs()));
        }

        #[test]
        fn angular_momentum_equals_polar_phi(
            x1 in -3.0f64..3.0,
            x2 in -3.0f64..3.0,
            p1 in -3.0f64..3.0,
            p2 in -3.0f64..3.0,
        ) {
            prop_assume!(x1.hypot(x2) > 1e-3);
            let state = CartesianState::from_coords(x1, x2, p1, p2);
            let polar = to_polar(&state).unwrap();
            prop_assert!((angular_momentum(&state) - polar.phi).abs() <= 1e-14 * (1.0 + polar.phi.abs()));
        }
    }
}
