//! Closed-form analysis of the unperturbed problem.
//!
//! For fixed energy `h` and angular momentum `L`, the motion in the
//! `(r, l)` plane follows the level curve `l^2 = phi(r)` with
//!
//! ```text
//! phi(r) = ((alpha^2 - L^2 c^2)/r^2 + 2 alpha h / r + h^2 - m^2 c^4) / c^2.
//! ```
//!
//! The orbit is closed and non-constant exactly when `0 < h < m c^2` and
//! `alpha^2/c^2 < L^2 < alpha^2 m^2 c^2 / (m^2 c^4 - h^2)`. This module
//! classifies the `(h, L)` plane, produces the apsidal radii, the radial
//! period (closed form and independent quadrature route), the apsidal
//! angle, the explicit polar trajectory, and the resonant-torus constants
//! `(h_{T,n}, L_{n,k}, r*_{T,n,k})` used by the periodic-orbit search.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::PhysParams;
use crate::error::{Error, Result, Violation};

/// Trichotomy of the `(h, L)` parameter plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum OrbitClass {
    /// Closed non-constant loop in the `(r, l)` plane, with the critical
    /// radius and the two apsidal radii as witnesses.
    ClosedNonCircular { r_star: f64, r_min: f64, r_max: f64 },
    /// Degenerate loop: the constant solution at the critical radius.
    Circular { r_star: f64 },
    /// Level set is unbounded or empty of closed loops.
    NoClosedOrbit,
    /// `l^2 = phi(r)` has no solution at all (phi a negative constant).
    NoMotion,
}

impl OrbitClass {
    pub fn is_closed_non_circular(&self) -> bool {
        matches!(self, OrbitClass::ClosedNonCircular { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            OrbitClass::ClosedNonCircular { .. } => "ClosedNonCircular",
            OrbitClass::Circular { .. } => "Circular",
            OrbitClass::NoClosedOrbit => "NoClosedOrbit",
            OrbitClass::NoMotion => "NoMotion",
        }
    }
}

/// Squared radial momentum `phi(r)` on the `(h, L)` level set.
pub fn radial_momentum_sq(r: f64, h: f64, l: f64, params: &PhysParams) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(Violation::new("r > 0", r, 0.0)));
    }
    let (c, alpha) = (params.c, params.alpha);
    let c2 = c * c;
    let m2c4 = params.rest_energy().powi(2);
    Ok(((alpha * alpha - l * l * c2) / (r * r) + 2.0 * alpha * h / r + h * h - m2c4) / c2)
}

/// Derivative of `phi` in `r`.
pub fn radial_momentum_sq_deriv(r: f64, h: f64, l: f64, params: &PhysParams) -> Result<f64> {
    if r <= 0.0 {
        return Err(Error::Domain(Violation::new("r > 0", r, 0.0)));
    }
    let (c, alpha) = (params.c, params.alpha);
    let c2 = c * c;
    Ok(-2.0 / (c2 * r * r * r) * (alpha * alpha - l * l * c2 + alpha * h * r))
}

/// Upper bound on `L^2` for closed orbits at energy `h`:
/// `alpha^2 m^2 c^2 / (m^2 c^4 - h^2)`.
fn ang_mom_sq_upper_bound(h: f64, params: &PhysParams) -> f64 {
    let m2c4 = params.rest_energy().powi(2);
    params.alpha * params.alpha * params.m * params.m * params.c * params.c / (m2c4 - h * h)
}

/// Classify the `(h, L)` pair. The circular boundary is detected with a
/// relative band of 1e-12 on `L^2`.
pub fn classify(h: f64, l: f64, params: &PhysParams) -> OrbitClass {
    let (c, alpha) = (params.c, params.alpha);
    let l2 = l * l;
    let l2_lower = alpha * alpha / (c * c);
    let mc2 = params.rest_energy();

    // alpha^2 = L^2 c^2 with h = 0: phi is a negative constant.
    if (l2 - l2_lower).abs() <= 1e-12 * l2_lower {
        return if h == 0.0 {
            OrbitClass::NoMotion
        } else {
            OrbitClass::NoClosedOrbit
        };
    }
    if !(h > 0.0 && h < mc2 && l2 > l2_lower) {
        return OrbitClass::NoClosedOrbit;
    }
    let upper = ang_mom_sq_upper_bound(h, params);
    if l2 < upper * (1.0 - 1e-13) {
        let r_star = critical_radius(h, l, params).expect("valid in regime");
        match radial_bounds_unchecked(h, l, params) {
            Some((r_min, r_max)) => OrbitClass::ClosedNonCircular {
                r_star,
                r_min,
                r_max,
            },
            None => OrbitClass::NoClosedOrbit,
        }
    } else if l2 <= upper * (1.0 + 1e-13) {
        let r_star = critical_radius(h, l, params).expect("valid in regime");
        OrbitClass::Circular { r_star }
    } else {
        OrbitClass::NoClosedOrbit
    }
}

/// Structured check of the closed-orbit inequalities, reporting the first
/// violated one.
pub fn require_closed_non_circular(h: f64, l: f64, params: &PhysParams) -> Result<(f64, f64)> {
    let mc2 = params.rest_energy();
    if !(h > 0.0) {
        return Err(Error::Regime(Violation::new("0 < h", h, 0.0)));
    }
    if !(h < mc2) {
        return Err(Error::Regime(Violation::new("h < m c^2", h, mc2)));
    }
    let l2 = l * l;
    let lower = params.alpha * params.alpha / (params.c * params.c);
    if !(l2 > lower) {
        return Err(Error::Regime(Violation::new("L^2 > alpha^2/c^2", l2, lower)));
    }
    let upper = ang_mom_sq_upper_bound(h, params);
    if !(l2 < upper * (1.0 - 1e-13)) {
        return Err(Error::Regime(Violation::new(
            "L^2 < alpha^2 m^2 c^2/(m^2 c^4 - h^2)",
            l2,
            upper,
        )));
    }
    radial_bounds_unchecked(h, l, params)
        .ok_or_else(|| Error::Regime(Violation::new("discriminant > 0", 0.0, 0.0)))
}

fn radial_bounds_unchecked(h: f64, l: f64, params: &PhysParams) -> Option<(f64, f64)> {
    let alpha = params.alpha;
    let m2c4 = params.rest_energy().powi(2);
    let c2 = params.c * params.c;
    let delta = alpha * alpha * m2c4 + l * l * c2 * (h * h - m2c4);
    if delta <= 0.0 {
        return None;
    }
    let sqrt_delta = delta.sqrt();
    let denom = m2c4 - h * h;
    Some(((alpha * h - sqrt_delta) / denom, (alpha * h + sqrt_delta) / denom))
}

/// Pericenter and apocenter radii `(r_min, r_max)`, the simple zeros of
/// `phi` in the closed-orbit regime.
pub fn radial_bounds(h: f64, l: f64, params: &PhysParams) -> Result<(f64, f64)> {
    require_closed_non_circular(h, l, params)
}

/// The critical radius `r* = (alpha^2 - L^2 c^2)/(-alpha h)`, the unique
/// extremum of `phi`. In the closed-orbit regime it is the maximizer and
/// lies strictly between the apsidal radii.
pub fn critical_radius(h: f64, l: f64, params: &PhysParams) -> Result<f64> {
    let alpha = params.alpha;
    let c2 = params.c * params.c;
    let denom = -alpha * h;
    if denom == 0.0 {
        return Err(Error::Regime(Violation::new("alpha h != 0", h, 0.0)));
    }
    let r_star = (alpha * alpha - l * l * c2) / denom;
    if r_star <= 0.0 {
        return Err(Error::Regime(Violation::new(
            "(alpha^2 - L^2 c^2)/(-alpha h) > 0",
            r_star,
            0.0,
        )));
    }
    Ok(r_star)
}

/// Minimal period of the radial coordinate:
/// `T_h = 2 pi alpha m^2 c^3 / (m^2 c^4 - h^2)^(3/2)`. Depends only on the
/// energy; strictly increasing on `(0, m c^2)`.
pub fn radial_period(h: f64, params: &PhysParams) -> Result<f64> {
    let mc2 = params.rest_energy();
    if !(h > 0.0 && h < mc2) {
        return Err(Error::Domain(Violation::new("0 < h < m c^2", h, mc2)));
    }
    let m2c4 = mc2 * mc2;
    Ok(TAU * params.alpha * params.m * params.m * params.c.powi(3) / (m2c4 - h * h).powf(1.5))
}

/// The radial period evaluated as the quadrature
/// `(2/c) Int_{r_min}^{r_max} (alpha + h u) / sqrt(Q(u)) du` with
/// `Q(u) = (alpha^2 - L^2 c^2) + 2 alpha h u + (h^2 - m^2 c^4) u^2`.
///
/// The substitution `u = r_min + (r_max - r_min) sin^2(psi)` removes both
/// inverse-square-root endpoint singularities; the smooth integrand is then
/// handled by fixed-order Gauss-Legendre quadrature. Agrees with
/// [`radial_period`] independently of `L`.
pub fn radial_period_quadrature(h: f64, l: f64, params: &PhysParams) -> Result<f64> {
    let (r_min, r_max) = require_closed_non_circular(h, l, params)?;
    let (c, alpha) = (params.c, params.alpha);
    let c2 = c * c;
    let m2c4 = params.rest_energy().powi(2);
    let width = r_max - r_min;
    let integrand = |psi: f64| {
        let (s, cs) = psi.sin_cos();
        let u = r_min + width * s * s;
        let q = (alpha * alpha - l * l * c2) + 2.0 * alpha * h * u + (h * h - m2c4) * u * u;
        debug_assert!(q > 0.0, "radicand must stay positive between the apsides");
        (alpha + h * u) * 2.0 * width * s * cs / q.sqrt()
    };
    let integral = gauss_legendre(&integrand, 0.0, PI / 2.0, 64);
    Ok(2.0 / c * integral)
}

/// Angle swept by `theta` over one radial period:
/// `2 pi / sqrt(1 - alpha^2/(c^2 L^2))`, always greater than `2 pi`.
pub fn apsidal_angle(l: f64, params: &PhysParams) -> Result<f64> {
    let ratio = angular_ratio(l, params)?;
    Ok(TAU / ratio)
}

/// `sqrt(1 - alpha^2/(c^2 L^2))`, the ratio of the radial to the angular
/// period. Equals `n/k` exactly on an `(n, k)` commensurable orbit.
pub fn angular_ratio(l: f64, params: &PhysParams) -> Result<f64> {
    let l2c2 = l * l * params.c * params.c;
    let a2 = params.alpha * params.alpha;
    if l2c2 <= a2 {
        return Err(Error::Domain(Violation::new("L^2 > alpha^2/c^2", l2c2, a2)));
    }
    Ok((1.0 - a2 / l2c2).sqrt())
}

/// The unique positive angular momentum with
/// `sqrt(1 - alpha^2/(c^2 L^2)) = n/k` for coprime `1 <= n < k`:
/// `L_{n,k} = (alpha/c) k / sqrt(k^2 - n^2)`.
pub fn commensurable_ang_mom(n: u32, k: u32, params: &PhysParams) -> Result<f64> {
    if n < 1 || n >= k {
        return Err(Error::Argument(format!("need 1 <= n < k, got n = {n}, k = {k}")));
    }
    if gcd(n, k) != 1 {
        return Err(Error::Argument(format!(
            "n = {n} and k = {k} must be coprime (gcd = {})",
            gcd(n, k)
        )));
    }
    let (nf, kf) = (n as f64, k as f64);
    Ok(params.alpha / params.c * kf / ((kf - nf) * (kf + nf)).sqrt())
}

/// Coefficients of the explicit polar trajectory
/// `rho(theta) = 1 / (amplitude * cos(ratio (theta - theta0)) + offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitShape {
    pub amplitude: f64,
    pub offset: f64,
    pub ratio: f64,
}

/// The denominator coefficients of the polar trajectory for `(h, L)`:
/// `amplitude = sqrt(alpha^2 m^2 c^4 + (h^2 - m^2 c^4) c^2 L^2)/(c^2 L^2 - alpha^2)`,
/// `offset = alpha h / (c^2 L^2 - alpha^2)` and the angular ratio.
pub fn polar_orbit_shape(h: f64, l: f64, params: &PhysParams) -> Result<OrbitShape> {
    require_closed_non_circular(h, l, params)?;
    let ratio = angular_ratio(l, params)?;
    let (c, alpha) = (params.c, params.alpha);
    let c2 = c * c;
    let m2c4 = params.rest_energy().powi(2);
    let denom = c2 * l * l - alpha * alpha;
    let radicand = alpha * alpha * m2c4 + (h * h - m2c4) * c2 * l * l;
    Ok(OrbitShape {
        amplitude: radicand.sqrt() / denom,
        offset: alpha * h / denom,
        ratio,
    })
}

/// The polar trajectory `rho(theta)` with pericenter at `theta0`. Strictly
/// positive; its range is exactly `[r_min, r_max]`.
pub fn polar_orbit_radius(
    theta: f64,
    h: f64,
    l: f64,
    theta0: f64,
    params: &PhysParams,
) -> Result<f64> {
    let shape = polar_orbit_shape(h, l, params)?;
    Ok(1.0 / (shape.amplitude * (shape.ratio * (theta - theta0)).cos() + shape.offset))
}

/// Radial period and angular frequency `(T_h, omega)` of the factorization
/// `x(t) = xhat(t) e^{i omega t}` with `xhat` being `T_h`-periodic.
pub fn quasi_periodic_frequencies(h: f64, l: f64, params: &PhysParams) -> Result<(f64, f64)> {
    require_closed_non_circular(h, l, params)?;
    let t_h = radial_period(h, params)?;
    let ratio = angular_ratio(l, params)?;
    Ok((t_h, TAU / (t_h * ratio)))
}

/// Threshold period `T*_n = 2 pi n alpha / (m c^3)`: the infimum of the
/// periods of orbits making `n` radial oscillations.
pub fn period_threshold(n: u32, params: &PhysParams) -> Result<f64> {
    if n < 1 {
        return Err(Error::Argument(format!("need n >= 1, got {n}")));
    }
    Ok(TAU * n as f64 * params.alpha / (params.m * params.c.powi(3)))
}

/// The unique energy with `n T_h = T`:
/// `h = sqrt(m^2 c^4 - (2 pi alpha m^2 c^3 n / T)^(2/3))`. Requires
/// `T > T*_n`.
pub fn energy_for_period(t_period: f64, n: u32, params: &PhysParams) -> Result<f64> {
    let t_star = period_threshold(n, params)?;
    if !(t_period > t_star) {
        return Err(Error::Hypothesis(Violation::new("T > T*_n", t_period, t_star)));
    }
    let m2c4 = params.rest_energy().powi(2);
    let base = TAU * params.alpha * params.m * params.m * params.c.powi(3) * n as f64 / t_period;
    Ok((m2c4 - base.powf(2.0 / 3.0)).sqrt())
}

/// Smallest winding count `k* > m c^2 n / h_{T,n}` admissible for the
/// torus construction; always at least 2 and greater than `n`.
pub fn min_winding(t_period: f64, n: u32, params: &PhysParams) -> Result<u32> {
    let h = energy_for_period(t_period, n, params)?;
    let threshold = params.rest_energy() * n as f64 / h;
    Ok(threshold.floor() as u32 + 1)
}

/// A resonant torus of the unperturbed problem: every orbit on it is
/// `T`-periodic, makes `n` radial oscillations and winds `sign * k` times
/// around the origin per period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusLabel {
    /// Period of every orbit on the torus.
    pub period: f64,
    /// Radial oscillations per period.
    pub n: u32,
    /// Winding count per period (unsigned).
    pub k: u32,
    /// Orientation: +1 counter-clockwise, -1 clockwise.
    pub sign: i8,
    /// Energy `h_{T,n}`.
    pub h: f64,
    /// Signed angular momentum `sign * L_{n,k}`.
    pub ang_mom: f64,
    /// The critical radius `r*_{T,n,k}`, crossed exactly `2n` times per
    /// period.
    pub r_star: f64,
}

impl TorusLabel {
    /// Assemble the torus constants `(h_{T,n}, sign * L_{n,k}, r*_{T,n,k})`
    /// for the given `(T, n, k, sign)`, validating every hypothesis:
    /// `T > T*_n`, `gcd(n, k) = 1`, `k >= k*_{T,n}`, and cross-checking the
    /// two routes to `r*`.
    pub fn new(t_period: f64, n: u32, k: u32, sign: i8, params: &PhysParams) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Argument(format!("sign must be +1 or -1, got {sign}")));
        }
        if n >= 1 && k > n && gcd(n, k) != 1 {
            return Err(Error::Hypothesis(Violation::new(
                "gcd(n, k) = 1",
                gcd(n, k) as f64,
                1.0,
            )));
        }
        let h = energy_for_period(t_period, n, params)?;
        let k_min = min_winding(t_period, n, params)?;
        if k < k_min {
            return Err(Error::Hypothesis(Violation::new(
                "k >= k*_{T,n}",
                k as f64,
                k_min as f64,
            )));
        }
        let l = commensurable_ang_mom(n, k, params)?;
        // r*_{T,n,k} = alpha n^2 / (h k^2) * 1/(1 - n^2/k^2)
        let (nf, kf) = (n as f64, k as f64);
        let r_star = params.alpha * nf * nf / (h * kf * kf) / (1.0 - nf * nf / (kf * kf));
        let r_star_direct = critical_radius(h, l, params)?;
        debug_assert!(
            (r_star - r_star_direct).abs() <= 1e-10 * r_star,
            "torus radius routes disagree: {r_star} vs {r_star_direct}"
        );
        // The admissibility inequalities must hold; k >= k* guarantees it.
        require_closed_non_circular(h, l, params)?;
        let t_check = radial_period(h, params)? * nf;
        debug_assert!((t_check - t_period).abs() <= 1e-10 * t_period);
        Ok(Self {
            period: t_period,
            n,
            k,
            sign,
            h,
            ang_mom: sign as f64 * l,
            r_star,
        })
    }

    /// Unsigned angular momentum `L_{n,k}`.
    pub fn abs_ang_mom(&self) -> f64 {
        self.ang_mom.abs()
    }

    /// Signed winding number `sign * k`.
    pub fn signed_winding(&self) -> i64 {
        self.sign as i64 * self.k as i64
    }
}

pub fn gcd(a: u32, b: u32) -> u32 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Fixed-order Gauss-Legendre quadrature of `f` over `[a, b]`.
pub fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre_rule(order);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Nodes and weights of the `order`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
