//! Implementations of the subcommands.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use relkepler::action_angle::{
    action_hamiltonian, action_hamiltonian_grad, action_hamiltonian_hess,
    action_hamiltonian_hess_det, actions_from,
};
use relkepler::dynamics::{to_cartesian, PolarState};
use relkepler::export::{find_report, format_float, to_json_pretty, trajectory_csv};
use relkepler::finder::{find_periodic as run_search, SearchConfig};
use relkepler::integrator::integrate;
use relkepler::perturbation::PerturbationSpec;
use relkepler::unperturbed::{
    classify as classify_pair, min_winding, polar_orbit_radius, polar_orbit_shape, radial_period,
    OrbitClass, TorusLabel,
};

use crate::{CliError, OutputFormat, Resolved};

/// Print the result document: pretty JSON, or flattened `field,value` CSV
/// rows (sorted by field path) when the output format is csv.
fn print_doc<T: Serialize>(doc: &T, cfg: &Resolved) {
    if cfg.format == OutputFormat::Json {
        print!("{}", to_json_pretty(doc));
        return;
    }
    let value = serde_json::to_value(doc).expect("serializable document");
    let mut rows = Vec::new();
    flatten_value("", &value, &mut rows);
    println!("field,value");
    for (path, scalar) in rows {
        println!("{path},{scalar}");
    }
}

fn flatten_value(prefix: &str, value: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            // serde_json with sorted maps keeps this ordering deterministic.
            for (key, sub) in map {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                flatten_value(&path, sub, rows);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, sub) in items.iter().enumerate() {
                flatten_value(&format!("{prefix}[{i}]"), sub, rows);
            }
        }
        serde_json::Value::Null => rows.push((prefix.to_string(), String::new())),
        scalar => rows.push((prefix.to_string(), scalar.to_string())),
    }
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

#[derive(Serialize)]
struct ConditionReport {
    condition: &'static str,
    satisfied: bool,
    value: f64,
    bound: f64,
}

pub fn classify(h: f64, l: f64, cfg: &Resolved) -> Result<i32, CliError> {
    let p = &cfg.params;
    let class = classify_pair(h, l, p);
    let mc2 = p.rest_energy();
    let l2_lower = p.alpha * p.alpha / (p.c * p.c);
    let l2_upper = p.alpha * p.alpha * p.m * p.m * p.c * p.c / (mc2 * mc2 - h * h);
    let conditions = vec![
        ConditionReport {
            condition: "0 < h",
            satisfied: h > 0.0,
            value: h,
            bound: 0.0,
        },
        ConditionReport {
            condition: "h < m c^2",
            satisfied: h < mc2,
            value: h,
            bound: mc2,
        },
        ConditionReport {
            condition: "L^2 > alpha^2/c^2",
            satisfied: l * l > l2_lower,
            value: l * l,
            bound: l2_lower,
        },
        ConditionReport {
            condition: "L^2 < alpha^2 m^2 c^2/(m^2 c^4 - h^2)",
            satisfied: h * h < mc2 * mc2 && l * l < l2_upper,
            value: l * l,
            bound: l2_upper,
        },
    ];
    let witnesses = match class {
        OrbitClass::ClosedNonCircular {
            r_star,
            r_min,
            r_max,
        } => json!({"r_star": r_star, "r_min": r_min, "r_max": r_max}),
        OrbitClass::Circular { r_star } => json!({ "r_star": r_star }),
        _ => json!({}),
    };
    print_doc(&json!({
        "class": class.name(),
        "h": h,
        "L": l,
        "witnesses": witnesses,
        "conditions": conditions,
    }), cfg);
    Ok(0)
}

pub fn torus(t: f64, n: u32, k: u32, sign: i8, cfg: &Resolved) -> Result<i32, CliError> {
    let p = &cfg.params;
    let torus = TorusLabel::new(t, n, k, sign, p)?;
    let k_star = min_winding(t, n, p)?;
    let actions = actions_from(torus.h, torus.abs_ang_mom(), p)?;
    let grad = action_hamiltonian_grad(&actions, p)?;
    let hess = action_hamiltonian_hess(&actions, p)?;
    let det = action_hamiltonian_hess_det(&actions, p)?;
    let resonance = [
        t * grad[0] / std::f64::consts::TAU,
        t * grad[1] / std::f64::consts::TAU,
    ];
    print_doc(&json!({
        "T": torus.period,
        "n": torus.n,
        "k": torus.k,
        "sign": torus.sign,
        "h": torus.h,
        "L": torus.ang_mom,
        "k_star": k_star,
        "r_star": torus.r_star,
        "actions": {"i1": actions.i1, "i2": actions.i2},
        "resonance_vector": resonance,
        "hess": [[hess[(0,0)], hess[(0,1)]], [hess[(1,0)], hess[(1,1)]]],
        "hess_det": det,
    }), cfg);
    Ok(0)
}

pub fn actions(h: f64, l: f64, cfg: &Resolved) -> Result<i32, CliError> {
    let p = &cfg.params;
    let acts = actions_from(h, l, p)?;
    let k0 = action_hamiltonian(&acts, p)?;
    let grad = action_hamiltonian_grad(&acts, p)?;
    let hess = action_hamiltonian_hess(&acts, p)?;
    let det = action_hamiltonian_hess_det(&acts, p)?;
    print_doc(&json!({
        "h": h,
        "L": l,
        "i1": acts.i1,
        "i2": acts.i2,
        "K0": k0,
        "grad": [grad[0], grad[1]],
        "hess": [[hess[(0,0)], hess[(0,1)]], [hess[(1,0)], hess[(1,1)]]],
        "hess_det": det,
    }), cfg);
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
pub fn orbit(
    h: Option<f64>,
    l: Option<f64>,
    t: Option<f64>,
    n: Option<u32>,
    k: Option<u32>,
    sign: i8,
    samples: usize,
    cfg: &Resolved,
) -> Result<i32, CliError> {
    let p = &cfg.params;
    // Resolve the orbit either from (h, L) directly or through the torus.
    let (h, l, windings, loops) = match (h, l, t, n, k) {
        (Some(h), Some(l), None, None, None) => (h, l, None, 1u32),
        (None, None, Some(t), Some(n), Some(k)) => {
            let torus = TorusLabel::new(t, n, k, sign, p)?;
            (torus.h, torus.ang_mom, Some(k), n)
        }
        _ => {
            return Err(CliError::Spec(
                "orbit needs either --h with --L, or --T with --n and --k".to_string(),
            ))
        }
    };
    ensure_out_dir(&cfg.out_dir)?;
    let class = classify_pair(h, l, p);
    let (shape_json, r_star, bounds) = match class {
        OrbitClass::ClosedNonCircular {
            r_star,
            r_min,
            r_max,
        } => {
            let shape = polar_orbit_shape(h, l, p)?;
            (
                json!({"amplitude": shape.amplitude, "offset": shape.offset, "ratio": shape.ratio}),
                r_star,
                Some((r_min, r_max)),
            )
        }
        OrbitClass::Circular { r_star } => (json!({}), r_star, None),
        _ => {
            return Err(CliError::Core(relkepler::Error::Regime(
                relkepler::Violation::new(
                    "closed-orbit regime required for orbit output",
                    h,
                    p.rest_energy(),
                ),
            )))
        }
    };

    // Polar curve rho(theta): the closed curve spans 2 pi k for the
    // commensurable case, one apsidal period otherwise; circular orbits are
    // a constant-radius circle.
    let mut shape_csv = String::from("theta,rho\n");
    let theta_span = match (&class, windings) {
        (OrbitClass::Circular { .. }, _) => std::f64::consts::TAU,
        (_, Some(k)) => std::f64::consts::TAU * k as f64,
        (_, None) => relkepler::unperturbed::apsidal_angle(l, p)?,
    };
    for i in 0..=samples {
        let theta = theta_span * i as f64 / samples as f64;
        let rho = match class {
            OrbitClass::Circular { r_star } => r_star,
            _ => polar_orbit_radius(theta, h, l.abs(), 0.0, p)?,
        };
        let signed_theta = if l < 0.0 { -theta } else { theta };
        shape_csv.push_str(&format_float(signed_theta));
        shape_csv.push(',');
        shape_csv.push_str(&format_float(rho));
        shape_csv.push('\n');
    }
    let shape_path = cfg.out_dir.join("orbit_shape.csv");
    fs::write(&shape_path, &shape_csv)?;

    // Integrated trajectory from the pericenter anchor (or the circle).
    let t_h = radial_period(h, p)?;
    let t_span = t_h * loops as f64;
    let r0 = match (bounds, &class) {
        (Some((r_min, _)), _) => r_min,
        (None, OrbitClass::Circular { r_star }) => *r_star,
        _ => unreachable!(),
    };
    let z0 = to_cartesian(&PolarState::new(r0, 0.0, 0.0, l))?;
    let traj = integrate(
        &z0,
        0.0,
        t_span,
        p,
        0.0,
        &PerturbationSpec::none(),
        &cfg.integrator,
    )?;
    let traj_path = cfg.out_dir.join("orbit_trajectory.csv");
    fs::write(&traj_path, trajectory_csv(&traj, samples))?;

    // Gap between the integrated radius and the closed-form curve.
    let mut sup_gap: f64 = 0.0;
    for i in 0..=samples {
        let time = t_span * i as f64 / samples as f64;
        let state = traj.state_at(time);
        let rho = match class {
            OrbitClass::Circular { r_star } => r_star,
            _ => polar_orbit_radius(traj.theta_at(time), h, l.abs(), 0.0, p)?,
        };
        sup_gap = sup_gap.max((state.radius() - rho).abs());
    }

    let summary = json!({
        "class": class.name(),
        "h": h,
        "L": l,
        "r_star": r_star,
        "r_min": bounds.map(|b| b.0),
        "r_max": bounds.map(|b| b.1),
        "shape": shape_json,
        "radial_period": t_h,
        "time_span": t_span,
        "sup_gap": sup_gap,
        "files": {
            "shape": shape_path.display().to_string(),
            "trajectory": traj_path.display().to_string(),
        },
    });
    fs::write(cfg.out_dir.join("orbit_summary.json"), to_json_pretty(&summary))?;
    print_doc(&summary, cfg);
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
pub fn find_periodic(
    t: f64,
    n: u32,
    k: u32,
    sign: i8,
    eps: f64,
    n_omega: usize,
    n_tau: usize,
    cfg: &Resolved,
) -> Result<i32, CliError> {
    let p = &cfg.params;
    let pert = cfg.perturbation_for(t)?;
    let search = SearchConfig {
        n_omega,
        n_tau,
        integrator: cfg.integrator,
        ..SearchConfig::default()
    };
    let result = run_search(t, n, k, sign, eps, &pert, p, &search)?;
    ensure_out_dir(&cfg.out_dir)?;
    let report = find_report(&result, pert.to_config());
    fs::write(
        cfg.out_dir.join("find_periodic.json"),
        to_json_pretty(&report),
    )?;
    for (i, sol) in result.solutions.iter().enumerate() {
        let path = cfg.out_dir.join(format!("solution_{i:02}.csv"));
        fs::write(path, trajectory_csv(&sol.trajectory, 2000))?;
    }
    let note = if result.degenerate_continuum {
        "degenerate (unperturbed continuum)"
    } else {
        "isolated fixed points"
    };
    print_doc(&json!({
        "found": result.solutions.len(),
        "seeds_tried": result.seeds_tried,
        "converged": result.converged,
        "deduplicated": result.deduplicated,
        "rejected": result.rejected,
        "note": note,
        "out": cfg.out_dir.display().to_string(),
    }), cfg);
    Ok(if result.solutions.is_empty() { 3 } else { 0 })
}

/// Grid description for `sweep`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "T")]
    pub t: f64,
    pub n: Vec<u32>,
    pub k: Vec<u32>,
    pub eps: Vec<f64>,
    #[serde(default = "default_signs")]
    pub signs: Vec<i8>,
    #[serde(default)]
    pub n_omega: Option<usize>,
    #[serde(default)]
    pub n_tau: Option<usize>,
}

fn default_signs() -> Vec<i8> {
    vec![1, -1]
}

pub fn sweep(spec_path: &Path, cfg: &Resolved) -> Result<i32, CliError> {
    let text = fs::read_to_string(spec_path)?;
    let spec: SweepSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Spec(format!("bad sweep spec {}: {e}", spec_path.display())))?;
    let p = &cfg.params;
    let pert = cfg.perturbation_for(spec.t)?;
    let search = SearchConfig {
        n_omega: spec.n_omega.unwrap_or(12),
        n_tau: spec.n_tau.unwrap_or(12),
        integrator: cfg.integrator,
        ..SearchConfig::default()
    };
    ensure_out_dir(&cfg.out_dir)?;
    let mut csv = String::from("n,k,sign,eps,found,min_residual,max_closeness\n");
    let mut cells = 0usize;
    for &n in &spec.n {
        for &k in &spec.k {
            for &sign in &spec.signs {
                for &eps in &spec.eps {
                    cells += 1;
                    let row = match run_search(spec.t, n, k, sign, eps, &pert, p, &search) {
                        Ok(result) => {
                            let min_residual = result
                                .solutions
                                .iter()
                                .map(|s| s.residual)
                                .fold(f64::INFINITY, f64::min);
                            let max_closeness = result
                                .solutions
                                .iter()
                                .map(|s| s.closeness)
                                .fold(0.0_f64, f64::max);
                            let (res_s, close_s) = if result.solutions.is_empty() {
                                ("nan".to_string(), "nan".to_string())
                            } else {
                                (format_float(min_residual), format_float(max_closeness))
                            };
                            format!(
                                "{n},{k},{sign},{},{},{res_s},{close_s}\n",
                                format_float(eps),
                                result.solutions.len()
                            )
                        }
                        Err(e) if matches!(&e, relkepler::Error::Hypothesis(_))
                            || matches!(&e, relkepler::Error::Argument(_)) =>
                        {
                            let _ = e;
                            format!("{n},{k},{sign},{},0,nan,nan\n", format_float(eps))
                        }
                        Err(e) => return Err(e.into()),
                    };
                    csv.push_str(&row);
                }
            }
        }
    }
    let csv_path = cfg.out_dir.join("sweep.csv");
    fs::write(&csv_path, csv)?;
    print_doc(&json!({
        "cells": cells,
        "csv": csv_path.display().to_string(),
    }), cfg);
    Ok(0)
}

