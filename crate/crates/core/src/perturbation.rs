//! Catalog of time-periodic perturbation potentials `U(t, x)`.
//!
//! Built-in kinds:
//!
//! * `none` -- identically zero;
//! * `dipole-cos` -- `U = A cos(2 pi t/T) x1/|x|`, breaking both the
//!   rotational and the time-translation symmetry;
//! * `radial-cos` -- `U = A cos(2 pi t/T) / |x|`, breaking only the time
//!   symmetry;
//! * `custom-table` -- cubic interpolation of `U` sampled on a regular
//!   `(t, r, theta)` grid, periodic in `t` and `theta`, with
//!   finite-difference derivatives.
//!
//! All kinds are exactly `T`-periodic in `t`: the time argument is reduced
//! modulo the period before any trigonometric evaluation.

use std::f64::consts::TAU;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a perturbation, as read from a JSON config
/// document. A missing `period` is filled in by the caller (the CLI uses
/// the forcing period of the search at hand).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PerturbationConfig {
    pub kind: String,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationKind {
    None,
    DipoleCos,
    RadialCos,
    CustomTable,
}

impl PerturbationKind {
    pub fn name(&self) -> &'static str {
        match self {
            PerturbationKind::None => "none",
            PerturbationKind::DipoleCos => "dipole-cos",
            PerturbationKind::RadialCos => "radial-cos",
            PerturbationKind::CustomTable => "custom-table",
        }
    }
}

/// A concrete perturbation, ready to evaluate. Cheap to clone; a loaded
/// table is shared behind an `Arc`.
#[derive(Debug, Clone)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub amplitude: f64,
    pub period: f64,
    table: Option<Arc<PotentialTable>>,
    table_path: Option<String>,
}

impl PerturbationSpec {
    pub fn none() -> Self {
        Self {
            kind: PerturbationKind::None,
            amplitude: 0.0,
            period: 1.0,
            table: None,
            table_path: None,
        }
    }

    pub fn dipole_cos(amplitude: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            kind: PerturbationKind::DipoleCos,
            amplitude,
            period,
            table: None,
            table_path: None,
        })
    }

    pub fn radial_cos(amplitude: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            kind: PerturbationKind::RadialCos,
            amplitude,
            period,
            table: None,
            table_path: None,
        })
    }

    pub fn custom_table(path: &Path, amplitude: f64, period: f64) -> Result<Self> {
        check_period(period)?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("cannot read {}: {e}", path.display())))?;
        let table = PotentialTable::parse_csv(&text, period)?;
        Ok(Self {
            kind: PerturbationKind::CustomTable,
            amplitude,
            period,
            table: Some(Arc::new(table)),
            table_path: Some(path.display().to_string()),
        })
    }

    pub fn from_config(config: &PerturbationConfig) -> Result<Self> {
        if config.kind == "none" {
            return Ok(Self::none());
        }
        let period = config.period.ok_or_else(|| {
            Error::Argument(format!("perturbation '{}' needs a period", config.kind))
        })?;
        match config.kind.as_str() {
            "dipole-cos" => Self::dipole_cos(config.amplitude, period),
            "radial-cos" => Self::radial_cos(config.amplitude, period),
            "custom-table" => {
                let path = config.table_path.as_ref().ok_or_else(|| {
                    Error::Table("custom-table requires table_path".to_string())
                })?;
                Self::custom_table(Path::new(path), config.amplitude, period)
            }
            other => Err(Error::Argument(format!(
                "unknown perturbation kind '{other}' (expected none, dipole-cos, radial-cos or custom-table)"
            ))),
        }
    }

    pub fn to_config(&self) -> PerturbationConfig {
        PerturbationConfig {
            kind: self.kind.name().to_string(),
            amplitude: self.amplitude,
            period: Some(self.period),
            table_path: self.table_path.clone(),
        }
    }

    /// `cos(2 pi t / T)` with `t` reduced modulo `T` first, so the factor is
    /// exactly `T`-periodic.
    fn envelope(&self, t: f64) -> f64 {
        let tau = t.rem_euclid(self.period);
        (TAU * tau / self.period).cos()
    }

    /// The potential value `U(t, x)`.
    pub fn potential(&self, t: f64, x: &Vector2<f64>) -> Result<f64> {
        let r = x.norm();
        if r == 0.0 && self.kind != PerturbationKind::None {
            return Err(Error::OriginState);
        }
        match self.kind {
            PerturbationKind::None => Ok(0.0),
            PerturbationKind::DipoleCos => Ok(self.amplitude * self.envelope(t) * x[0] / r),
            PerturbationKind::RadialCos => Ok(self.amplitude * self.envelope(t) / r),
            PerturbationKind::CustomTable => {
                let table = self.table.as_ref().expect("table loaded");
                let theta = x[1].atan2(x[0]);
                Ok(self.amplitude * table.value(t, r, theta)?)
            }
        }
    }

    /// The spatial gradient `grad_x U(t, x)`.
    pub fn gradient(&self, t: f64, x: &Vector2<f64>) -> Result<Vector2<f64>> {
        let r = x.norm();
        if r == 0.0 && self.kind != PerturbationKind::None {
            return Err(Error::OriginState);
        }
        match self.kind {
            PerturbationKind::None => Ok(Vector2::zeros()),
            PerturbationKind::DipoleCos => {
                // grad(x1/r) = e1/r - x1 x / r^3
                let r3 = r * r * r;
                let grad = Vector2::new(1.0 / r - x[0] * x[0] / r3, -x[0] * x[1] / r3);
                Ok(grad * (self.amplitude * self.envelope(t)))
            }
            PerturbationKind::RadialCos => {
                // grad(1/r) = -x / r^3
                let r3 = r * r * r;
                Ok(-x / r3 * (self.amplitude * self.envelope(t)))
            }
            PerturbationKind::CustomTable => {
                let table = self.table.as_ref().expect("table loaded");
                let theta = x[1].atan2(x[0]);
                let (du_dr, du_dtheta) = table.polar_gradient(t, r, theta)?;
                // Chain rule through (r, theta).
                let radial = x / r;
                let tangential = Vector2::new(-x[1], x[0]) / (r * r);
                Ok((radial * du_dr + tangential * du_dtheta) * self.amplitude)
            }
        }
    }

    /// The spatial Hessian `Hess_x U(t, x)`, analytic for the built-in kinds
    /// and central-difference (step 1e-7) for tables.
    pub fn hessian(&self, t: f64, x: &Vector2<f64>) -> Result<Matrix2<f64>> {
        let r = x.norm();
        if r == 0.0 && self.kind != PerturbationKind::None {
            return Err(Error::OriginState);
        }
        match self.kind {
            PerturbationKind::None => Ok(Matrix2::zeros()),
            PerturbationKind::DipoleCos => {
                let r2 = r * r;
                let r3 = r2 * r;
                let r5 = r3 * r2;
                let outer = x * x.transpose();
                let e1 = Vector2::new(1.0, 0.0);
                let mixed = e1 * x.transpose() + x * e1.transpose();
                let hess = outer * (3.0 * x[0] / r5) - (mixed + Matrix2::identity() * x[0]) / r3;
                Ok(hess * (self.amplitude * self.envelope(t)))
            }
            PerturbationKind::RadialCos => {
                let r2 = r * r;
                let r3 = r2 * r;
                let r5 = r3 * r2;
                let outer = x * x.transpose();
                let hess = outer * (3.0 / r5) - Matrix2::identity() / r3;
                Ok(hess * (self.amplitude * self.envelope(t)))
            }
            PerturbationKind::CustomTable => {
                let h = 1e-7 * r.max(1.0);
                let mut hess = Matrix2::zeros();
                for j in 0..2 {
                    let mut xp = *x;
                    let mut xm = *x;
                    xp[j] += h;
                    xm[j] -= h;
                    let gp = self.gradient(t, &xp)?;
                    let gm = self.gradient(t, &xm)?;
                    for i in 0..2 {
                        hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
                    }
                }
                // Symmetrize the finite-difference result.
                let sym = (hess + hess.transpose()) * 0.5;
                Ok(sym)
            }
        }
    }
}

fn check_period(period: f64) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidParam {
            name: "period",
            value: period,
        });
    }
    Ok(())
}

/// `U` sampled on a regular `(t, r, theta)` grid. `t` is periodic with the
/// forcing period, `theta` is `2 pi`-periodic, `r` queries outside the grid
/// range are a domain error.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    period: f64,
    t_count: usize,
    r_vals: Vec<f64>,
    theta_count: usize,
    /// `data[(it * nr + ir) * ntheta + itheta]`
    data: Vec<f64>,
}

impl PotentialTable {
    /// Parse the `t,r,theta,U` CSV format. The rows must form a complete
    /// regular grid; `t` must uniformly cover `[0, period)` and `theta`
    /// must uniformly cover `[0, 2 pi)`.
    pub fn parse_csv(text: &str, period: f64) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Table("empty table file".to_string()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["t", "r", "theta", "U"] {
            return Err(Error::Table(format!(
                "expected header 't,r,theta,U', got '{header}'"
            )));
        }
        let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
        for (idx, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::Table(format!(
                    "row {}: expected 4 fields, got {}",
                    idx + 2,
                    fields.len()
                )));
            }
            let mut vals = [0.0; 4];
            for (k, f) in fields.iter().enumerate() {
                vals[k] = f.parse::<f64>().map_err(|e| {
                    Error::Table(format!("row {}: bad number '{f}': {e}", idx + 2))
                })?;
            }
            rows.push((vals[0], vals[1], vals[2], vals[3]));
        }
        let t_vals = sorted_unique(rows.iter().map(|r| r.0));
        let r_vals = sorted_unique(rows.iter().map(|r| r.1));
        let theta_vals = sorted_unique(rows.iter().map(|r| r.2));
        let (nt, nr, ntheta) = (t_vals.len(), r_vals.len(), theta_vals.len());
        if nt < 2 || nr < 4 || ntheta < 2 {
            return Err(Error::Table(format!(
                "grid too small: {nt} x {nr} x {ntheta} (need >= 2 x 4 x 2)"
            )));
        }
        if rows.len() != nt * nr * ntheta {
            return Err(Error::Table(format!(
                "incomplete grid: {} rows for a {nt} x {nr} x {ntheta} grid",
                rows.len()
            )));
        }
        check_uniform("t", &t_vals, Some(period))?;
        check_uniform("theta", &theta_vals, Some(TAU))?;
        check_uniform("r", &r_vals, None)?;

        let mut data = vec![f64::NAN; nt * nr * ntheta];
        for (t, r, theta, u) in rows {
            let it = index_of(&t_vals, t);
            let ir = index_of(&r_vals, r);
            let ith = index_of(&theta_vals, theta);
            data[(it * nr + ir) * ntheta + ith] = u;
        }
        if data.iter().any(|v| v.is_nan()) {
            return Err(Error::Table("grid has duplicate or missing nodes".to_string()));
        }
        Ok(Self {
            period,
            t_count: nt,
            r_vals,
            theta_count: ntheta,
            data,
        })
    }

    fn node(&self, it: usize, ir: usize, ith: usize) -> f64 {
        self.data[(it * self.r_vals.len() + ir) * self.theta_count + ith]
    }

    /// Interpolated value at `(t, r, theta)`; cubic in each axis, periodic
    /// in `t` and `theta`, clamped stencil near the `r` edges.
    pub fn value(&self, t: f64, r: f64, theta: f64) -> Result<f64> {
        let nr = self.r_vals.len();
        let (r_lo, r_hi) = (self.r_vals[0], self.r_vals[nr - 1]);
        if !(r_lo..=r_hi).contains(&r) {
            return Err(Error::InterpolationDomain {
                axis: "r",
                value: r,
                lo: r_lo,
                hi: r_hi,
            });
        }
        let dt = self.period / self.t_count as f64;
        let (it, ut) = periodic_cell(t.rem_euclid(self.period), dt, self.t_count);
        let dth = TAU / self.theta_count as f64;
        let (ith, uth) = periodic_cell(theta.rem_euclid(TAU), dth, self.theta_count);
        let dr = self.r_vals[1] - self.r_vals[0];
        let fr = ((r - r_lo) / dr).clamp(0.0, (nr - 1) as f64 - 1e-12);
        let ir = fr.floor() as usize;
        let ur = fr - ir as f64;

        let wt = catmull_rom_weights(ut);
        let wr = catmull_rom_weights(ur);
        let wth = catmull_rom_weights(uth);
        let mut acc = 0.0;
        for (a, &wa) in wt.iter().enumerate() {
            let ti = wrap_index(it as i64 + a as i64 - 1, self.t_count);
            for (b, &wb) in wr.iter().enumerate() {
                let ri = clamp_index(ir as i64 + b as i64 - 1, nr);
                for (g, &wg) in wth.iter().enumerate() {
                    let thi = wrap_index(ith as i64 + g as i64 - 1, self.theta_count);
                    acc += wa * wb * wg * self.node(ti, ri, thi);
                }
            }
        }
        Ok(acc)
    }

    /// `(dU/dr, dU/dtheta)` by central differences of the interpolant.
    pub fn polar_gradient(&self, t: f64, r: f64, theta: f64) -> Result<(f64, f64)> {
        let nr = self.r_vals.len();
        let dr_grid = self.r_vals[1] - self.r_vals[0];
        let h_r = (1e-6 * r.max(1.0)).min(0.25 * dr_grid);
        let (r_lo, r_hi) = (self.r_vals[0], self.r_vals[nr - 1]);
        if r - h_r < r_lo || r + h_r > r_hi {
            // One-sided at the edges so in-range queries keep working.
            let (a, b) = if r - h_r < r_lo {
                (r, r + h_r)
            } else {
                (r - h_r, r)
            };
            let du_dr = (self.value(t, b, theta)? - self.value(t, a, theta)?) / (b - a);
            let h_th = 1e-6;
            let du_dth = (self.value(t, r, theta + h_th)? - self.value(t, r, theta - h_th)?)
                / (2.0 * h_th);
            return Ok((du_dr, du_dth));
        }
        let du_dr = (self.value(t, r + h_r, theta)? - self.value(t, r - h_r, theta)?) / (2.0 * h_r);
        let h_th = 1e-6;
        let du_dth =
            (self.value(t, r, theta + h_th)? - self.value(t, r, theta - h_th)?) / (2.0 * h_th);
        Ok((du_dr, du_dth))
    }
}

fn sorted_unique(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + a.abs()));
    v
}

fn index_of(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .position(|v| (v - x).abs() <= 1e-12 * (1.0 + x.abs()))
        .expect("grid value present")
}

fn check_uniform(axis: &'static str, values: &[f64], period: Option<f64>) -> Result<()> {
    let n = values.len();
    let step = match period {
        // Periodic axes must tile [0, period) starting at 0.
        Some(p) => p / n as f64,
        None => (values[n - 1] - values[0]) / (n - 1) as f64,
    };
    let origin = if period.is_some() { 0.0 } else { values[0] };
    for (i, &v) in values.iter().enumerate() {
        let expected = origin + step * i as f64;
        if (v - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            return Err(Error::Table(format!(
                "{axis} grid is not uniform: node {i} is {v}, expected {expected}"
            )));
        }
    }
    Ok(())
}

fn periodic_cell(value: f64, step: f64, count: usize) -> (usize, f64) {
    let f = value / step;
    let mut i = f.floor() as i64;
    let mut u = f - i as f64;
    if i as usize >= count {
        i = 0;
        u = 0.0;
    }
    (i as usize, u)
}

fn wrap_index(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

fn clamp_index(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}

/// Catmull-Rom cubic weights for the 4-point stencil around local
/// coordinate `u` in `[0, 1]`.
fn catmull_rom_weights(u: f64) -> [f64; 4] {
    let u2 = u * u;
    let u3 = u2 * u;
    [
        -0.5 * u3 + u2 - 0.5 * u,
        1.5 * u3 - 2.5 * u2 + 1.0,
        -1.5 * u3 + 2.0 * u2 + 0.5 * u,
        0.5 * u3 - 0.5 * u2,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_gradient_is_zero() {
        let pert = PerturbationSpec::none();
        let g = pert.gradient(3.7, &Vector2::new(0.4, -2.0)).unwrap();
        assert_eq!(g, Vector2::zeros());
    }

    #[test]
    fn dipole_cos_vanishes_at_quarter_period() {
        // cos(pi/2) is the zero of the envelope.
        let period = 8.0;
        let pert = PerturbationSpec::dipole_cos(1.0, period).unwrap();
        let g = pert.gradient(period / 4.0, &Vector2::new(1.3, 0.4)).unwrap();
        assert!(g.norm() < 1e-15);
    }

    #[test]
    fn radial_cos_gradient_hand_value() {
        // U = cos(2 pi t/T)/|x| at t = 0, x = (2, 0): grad = -x/r^3 = (-1/4, 0).
        let pert = PerturbationSpec::radial_cos(1.0, 5.0).unwrap();
        let g = pert.gradient(0.0, &Vector2::new(2.0, 0.0)).unwrap();
        assert!((g[0] + 0.25).abs() < 1e-15);
        assert_eq!(g[1], 0.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let period = 3.0;
        let specs = [
            PerturbationSpec::dipole_cos(1.0, period).unwrap(),
            PerturbationSpec::radial_cos(0.8, period).unwrap(),
        ];
        let points = [
            Vector2::new(1.0, 0.3),
            Vector2::new(-0.7, 1.9),
            Vector2::new(0.2, -0.5),
        ];
        let h = 1e-6;
        for pert in &specs {
            for x in &points {
                for t in [0.0, 0.4, 1.7] {
                    let g = pert.gradient(t, x).unwrap();
                    for j in 0..2 {
                        let mut xp = *x;
                        let mut xm = *x;
                        xp[j] += h;
                        xm[j] -= h;
                        let fd = (pert.potential(t, &xp).unwrap()
                            - pert.potential(t, &xm).unwrap())
                            / (2.0 * h);
                        assert!((g[j] - fd).abs() < 1e-6, "{} component {j}", pert.kind.name());
                    }
                }
            }
        }
    }

    #[test]
    fn hessians_match_finite_differences() {
        let period = 3.0;
        let specs = [
            PerturbationSpec::dipole_cos(1.0, period).unwrap(),
            PerturbationSpec::radial_cos(0.8, period).unwrap(),
        ];
        let x = Vector2::new(0.9, -0.6);
        let h = 1e-6;
        for pert in &specs {
            let hess = pert.hessian(0.3, &x).unwrap();
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let gp = pert.gradient(0.3, &xp).unwrap();
                let gm = pert.gradient(0.3, &xm).unwrap();
                for i in 0..2 {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    assert!((hess[(i, j)] - fd).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn exact_time_periodicity() {
        let period = 7.25;
        let pert = PerturbationSpec::dipole_cos(1.0, period).unwrap();
        let x = Vector2::new(1.1, 0.7);
        for t in [0.0, 1.3, 5.9] {
            let a = pert.gradient(t, &x).unwrap();
            let b = pert.gradient(t + 3.0 * period, &x).unwrap();
            assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }
    }

    fn synthetic_table(period: f64) -> String {
        // U(t, r, theta) = cos(2 pi t / T) / r on a 16 x 64 x 8 grid.
        let (nt, nr, nth) = (16, 64, 8);
        let mut out = String::from("t,r,theta,U\n");
        for it in 0..nt {
            let t = period * it as f64 / nt as f64;
            for ir in 0..nr {
                let r = 0.5 + 2.5 * ir as f64 / (nr - 1) as f64;
                for ith in 0..nth {
                    let theta = TAU * ith as f64 / nth as f64;
                    let u = (TAU * t / period).cos() / r;
                    out.push_str(&format!("{t},{r},{theta},{u}\n"));
                }
            }
        }
        out
    }

    #[test]
    fn table_interpolates_radial_potential() {
        let period = 4.0;
        let table = PotentialTable::parse_csv(&synthetic_table(period), period).unwrap();
        for (t, r, theta) in [(0.3, 1.2, 0.7), (2.9, 2.3, 4.0), (1.0, 0.8, 2.2)] {
            let v = table.value(t, r, theta).unwrap();
            let exact = (TAU * t / period).cos() / r;
            assert!((v - exact).abs() < 2e-3, "{v} vs {exact}");
        }
    }

    #[test]
    fn table_gradient_close_to_analytic() {
        let period = 4.0;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        std::fs::write(&path, synthetic_table(period)).unwrap();
        let pert = PerturbationSpec::custom_table(&path, 1.0, period).unwrap();
        let reference = PerturbationSpec::radial_cos(1.0, period).unwrap();
        let x = Vector2::new(1.0, 0.9);
        let g = pert.gradient(0.6, &x).unwrap();
        let gr = reference.gradient(0.6, &x).unwrap();
        assert!((g - gr).norm() < 5e-3, "{g:?} vs {gr:?}");
    }

    #[test]
    fn table_hessian_fallback_close_to_analytic() {
        let period = 4.0;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        std::fs::write(&path, synthetic_table(period)).unwrap();
        let pert = PerturbationSpec::custom_table(&path, 1.0, period).unwrap();
        let reference = PerturbationSpec::radial_cos(1.0, period).unwrap();
        let x = Vector2::new(1.1, 0.8);
        let h = pert.hessian(0.6, &x).unwrap();
        let hr = reference.hessian(0.6, &x).unwrap();
        assert_eq!(h[(0, 1)], h[(1, 0)]);
        assert!((h - hr).norm() < 0.05, "{h:?} vs {hr:?}");
    }

    #[test]
    fn table_out_of_range_radius_is_an_error() {
        let period = 4.0;
        let table = PotentialTable::parse_csv(&synthetic_table(period), period).unwrap();
        let err = table.value(0.1, 12.0, 0.3).unwrap_err();
        assert!(matches!(err, Error::InterpolationDomain { axis: "r", .. }));
    }

    #[test]
    fn config_round_trip() {
        let cfg = PerturbationConfig {
            kind: "dipole-cos".to_string(),
            amplitude: 0.5,
            period: Some(6.0),
            table_path: None,
        };
        let pert = PerturbationSpec::from_config(&cfg).unwrap();
        assert_eq!(pert.to_config(), cfg);
        let parsed: PerturbationConfig =
            serde_json::from_str(r#"{"kind":"radial-cos","amplitude":2.0,"period":3.5}"#).unwrap();
        assert_eq!(parsed.kind, "radial-cos");
        assert!(PerturbationSpec::from_config(&parsed).is_ok());
        // A periodic kind without a period is rejected.
        let missing: PerturbationConfig =
            serde_json::from_str(r#"{"kind":"dipole-cos"}"#).unwrap();
        assert!(PerturbationSpec::from_config(&missing).is_err());
    }
}
