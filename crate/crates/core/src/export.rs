//! Deterministic serialization of results.
//!
//! CSV floats are printed with 17 significant digits (`{:.16e}`), which
//! round-trips every f64 exactly; JSON goes through `serde_json`, whose
//! shortest-round-trip float printing is likewise exact and deterministic.
//! Identical inputs therefore always produce byte-identical artifacts.

use serde::Serialize;

use crate::dynamics::{angular_momentum, hamiltonian};
use crate::finder::{FindResult, PeriodicSolution};
use crate::integrator::Trajectory;
use crate::perturbation::PerturbationConfig;

/// 17-significant-digit float formatting used by every CSV emitter.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header of the trajectory CSV format.
pub const TRAJECTORY_CSV_HEADER: &str = "t,x1,x2,p1,p2,r,theta_unwrapped,H0,L0";

/// Sample a trajectory at `samples + 1` uniform times (endpoints included)
/// and render the standard CSV columns.
pub fn trajectory_csv(traj: &Trajectory, samples: usize) -> String {
    let mut out = String::with_capacity((samples + 2) * 160);
    out.push_str(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    let t0 = traj.start_time();
    let t1 = traj.end_time();
    let params = *traj.params();
    for i in 0..=samples {
        let t = t0 + (t1 - t0) * i as f64 / samples as f64;
        let state = traj.state_at(t);
        let theta = traj.theta_at(t);
        let h0 = hamiltonian(&state, &params).unwrap_or(f64::NAN);
        let l0 = angular_momentum(&state);
        let row = [
            t,
            state.x[0],
            state.x[1],
            state.p[0],
            state.p[1],
            state.radius(),
            theta,
            h0,
            l0,
        ];
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format_float(v));
            first = false;
        }
        out.push('\n');
    }
    out
}

/// Torus constants as serialized in reports.
#[derive(Debug, Clone, Serialize)]
pub struct TorusReport {
    #[serde(rename = "T")]
    pub period: f64,
    pub n: u32,
    pub k: u32,
    pub sign: i8,
    pub h: f64,
    #[serde(rename = "L")]
    pub ang_mom: f64,
    pub r_star: f64,
}

/// One solution row of the search report.
#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    pub z0: [f64; 4],
    pub residual: f64,
    pub residual_recheck: f64,
    pub iterations: usize,
    pub winding: i64,
    pub crossings: usize,
    pub closeness: f64,
}

/// The JSON document produced by a periodic-orbit search.
#[derive(Debug, Clone, Serialize)]
pub struct FindReport {
    pub torus: TorusReport,
    pub eps: f64,
    pub perturbation: PerturbationConfig,
    pub solutions: Vec<SolutionReport>,
    pub seeds_tried: usize,
    pub converged: usize,
    pub deduplicated: usize,
    pub rejected: usize,
    pub near_duplicates: Vec<(usize, usize)>,
    pub degenerate_continuum: bool,
}

pub fn solution_report(sol: &PeriodicSolution) -> SolutionReport {
    SolutionReport {
        z0: sol.z0.to_array(),
        residual: sol.residual,
        residual_recheck: sol.residual_recheck,
        iterations: sol.iterations,
        winding: sol.winding,
        crossings: sol.crossings,
        closeness: sol.closeness,
    }
}

/// Assemble the report document for a search result.
pub fn find_report(result: &FindResult, perturbation: PerturbationConfig) -> FindReport {
    FindReport {
        torus: TorusReport {
            period: result.torus.period,
            n: result.torus.n,
            k: result.torus.k,
            sign: result.torus.sign,
            h: result.torus.h,
            ang_mom: result.torus.ang_mom,
            r_star: result.torus.r_star,
        },
        eps: result.eps,
        perturbation,
        solutions: result.solutions.iter().map(solution_report).collect(),
        seeds_tried: result.seeds_tried,
        converged: result.converged,
        deduplicated: result.deduplicated,
        rejected: result.rejected,
        near_duplicates: result.near_duplicates.clone(),
        degenerate_continuum: result.degenerate_continuum,
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}
