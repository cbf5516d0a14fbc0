//! Multi-start Newton shooting for `T`-periodic solutions of the perturbed
//! problem.
//!
//! A fixed point of the time-`T` map `Phi_T` of the perturbed flow is a
//! `T`-periodic solution. The unperturbed resonant torus supplies a
//! two-parameter family of candidates `e^{i omega} x*(. + tau)`; a grid of
//! those seeds is driven by a damped Newton iteration on
//! `F(z) = Phi_T(z) - z`, with the Jacobian from the variational flow.
//!
//! At `eps = 0` the matrix `D Phi_T - I` is singular along the
//! two-dimensional torus tangent, so the Newton solve is regularized in the
//! two smallest singular directions (Levenberg shift
//! `lambda = max(1e-8, min(0.1 sigma_3, |F|))`, decaying with the residual)
//! and damped by Armijo backtracking on `|F|`.
//!
//! Every converged point is verified before being reported: the winding
//! number must be `sign * k`, the orbit must cross the torus radius
//! `r*` exactly `2n` times transversally, the fixed-point residual must
//! survive a re-check at tighter integrator tolerance, and the C0 distance
//! to the unperturbed torus family is measured and attached.

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::dynamics::{rotate_state, to_cartesian, CartesianState, PhysParams, PolarState};
use crate::error::{Error, Result};
use crate::integrator::{
    flow_map, flow_with_tangent, integrate, radius_crossings, winding_number, IntegratorConfig,
    Trajectory,
};
use crate::perturbation::PerturbationSpec;
use crate::unperturbed::{radial_bounds, TorusLabel};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Seed family on an unperturbed torus: `n_omega` rotation phases times
/// `n_tau` time shifts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeedGrid {
    pub torus: TorusLabel,
    pub n_omega: usize,
    pub n_tau: usize,
}

/// Newton iteration controls.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NewtonConfig {
    pub max_iters: usize,
    /// Success threshold on the Euclidean fixed-point residual.
    pub tol: f64,
    /// Zero-iteration acceptance threshold for the unperturbed continuum.
    pub unperturbed_accept: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iters: 25,
            tol: 1e-9,
            unperturbed_accept: 1e-7,
        }
    }
}

/// Controls for the whole search pipeline.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchConfig {
    pub n_omega: usize,
    pub n_tau: usize,
    pub newton: NewtonConfig,
    pub integrator: IntegratorConfig,
    /// Zero-shift sup-norm distance below which two fixed points are the
    /// same solution.
    pub dedup_state_tol: f64,
    /// Time-shifted trajectory distance below which two distinct solutions
    /// are flagged as near-duplicates in the report.
    pub dedup_phase_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_omega: 12,
            n_tau: 12,
            newton: NewtonConfig::default(),
            integrator: IntegratorConfig::default(),
            dedup_state_tol: 1e-5,
            dedup_phase_tol: 1e-5,
        }
    }
}

/// A converged fixed point of the time-`T` map, before verification.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    pub z0: CartesianState,
    pub residual: f64,
    pub iterations: usize,
}

/// Outcome of one Newton run.
#[derive(Debug, Clone)]
pub enum ShootOutcome {
    Converged(FixedPoint),
    Failed { best_residual: f64, iterations: usize },
}

impl ShootOutcome {
    pub fn converged(&self) -> Option<&FixedPoint> {
        match self {
            ShootOutcome::Converged(fp) => Some(fp),
            ShootOutcome::Failed { .. } => None,
        }
    }
}

/// A verified `T`-periodic solution of the perturbed problem.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    pub z0: CartesianState,
    pub period: f64,
    pub eps: f64,
    /// Fixed-point residual at the working tolerance.
    pub residual: f64,
    /// Fixed-point residual re-measured at rel_tol 1e-12.
    pub residual_recheck: f64,
    pub winding: i64,
    pub crossings: usize,
    /// C0 distance to the nearest member of the unperturbed torus family.
    pub closeness: f64,
    pub iterations: usize,
    pub torus: TorusLabel,
    pub trajectory: Trajectory,
}

/// Aggregate result of a periodic-orbit search.
#[derive(Debug, Clone)]
pub struct FindResult {
    pub torus: TorusLabel,
    pub eps: f64,
    pub solutions: Vec<PeriodicSolution>,
    pub seeds_tried: usize,
    pub converged: usize,
    pub deduplicated: usize,
    /// Converged points dropped by the verification gates.
    pub rejected: usize,
    /// Pairs of reported solutions whose time-shifted trajectories come
    /// closer than the phase tolerance.
    pub near_duplicates: Vec<(usize, usize)>,
    /// Set when `eps = 0`: the whole torus is a continuum of fixed points.
    pub degenerate_continuum: bool,
}

/// Pericenter point of the torus orbit: `(r_min, theta = 0, l = 0, phi = L)`.
pub fn torus_anchor(torus: &TorusLabel, params: &PhysParams) -> Result<CartesianState> {
    let (r_min, _) = radial_bounds(torus.h, torus.abs_ang_mom(), params)?;
    to_cartesian(&PolarState::new(r_min, 0.0, 0.0, torus.ang_mom))
}

/// One full unperturbed period of the torus orbit, used both for seeding
/// and as the comparison family for the closeness measure.
pub fn torus_reference(
    torus: &TorusLabel,
    params: &PhysParams,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let anchor = torus_anchor(torus, params)?;
    integrate(
        &anchor,
        0.0,
        torus.period,
        params,
        0.0,
        &PerturbationSpec::none(),
        config,
    )
}

/// The seed states `e^{i omega} x*(tau)` on the grid
/// `omega = 2 pi i / n_omega`, `tau = T j / n_tau`, ordered by `(i, j)`.
pub fn seed_states(grid: &SeedGrid, reference: &Trajectory) -> Vec<CartesianState> {
    let period = reference.end_time() - reference.start_time();
    let mut seeds = Vec::with_capacity(grid.n_omega * grid.n_tau);
    for i in 0..grid.n_omega {
        let omega = std::f64::consts::TAU * i as f64 / grid.n_omega as f64;
        for j in 0..grid.n_tau {
            let tau = period * j as f64 / grid.n_tau as f64;
            let base = if j == 0 {
                reference.initial_state()
            } else {
                reference.state_at(reference.start_time() + tau)
            };
            seeds.push(rotate_state(&base, omega));
        }
    }
    seeds
}

fn vec4(state: &CartesianState) -> Vector4<f64> {
    let a = state.to_array();
    Vector4::new(a[0], a[1], a[2], a[3])
}

fn state_from_vec4(v: &Vector4<f64>) -> CartesianState {
    CartesianState::from_coords(v[0], v[1], v[2], v[3])
}

/// Regularized Newton step: solve `(J + lambda Q) dz = -f` through the SVD
/// of `J`, shifting only the two smallest singular values. The shift decays
/// with the residual so the endgame contracts at the full Newton rate even
/// when the fourth singular value is tiny.
fn levenberg_step(jac: &Matrix4<f64>, f: &Vector4<f64>) -> Vector4<f64> {
    let svd = jac.svd(true, true);
    let u = svd.u.expect("svd with u");
    let v_t = svd.v_t.expect("svd with v_t");
    let sigma = svd.singular_values;
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let lambda = (0.1 * sigma[order[2]]).min(f.norm()).max(1e-8);
    let utf = u.transpose() * f;
    let mut dz = Vector4::zeros();
    for (rank, &i) in order.iter().enumerate() {
        let shift = if rank >= 2 { lambda } else { 0.0 };
        let denom = sigma[i] + shift;
        let coeff = utf[i] / denom;
        dz -= v_t.row(i).transpose() * coeff;
    }
    dz
}

/// Fixed-point residual vector `Phi_T(z) - z`; integration failures on the
/// way count as a failed trial.
fn residual_vec(
    z: &CartesianState,
    t_period: f64,
    params: &PhysParams,
    eps: f64,
    pert: &PerturbationSpec,
    config: &IntegratorConfig,
) -> Result<Vector4<f64>> {
    let end = flow_map(z, 0.0, t_period, params, eps, pert, config)?;
    Ok(vec4(&end) - vec4(z))
}

/// Damped, regularized Newton iteration on `F(z) = Phi_T(z) - z`.
///
/// A seed whose residual is already below the success threshold is accepted
/// with zero iterations; at `eps = 0` the looser `unperturbed_accept`
/// threshold applies, since the continuum of fixed points leaves nothing
/// for Newton to improve.
pub fn newton_shoot(
    seed: &CartesianState,
    t_period: f64,
    eps: f64,
    pert: &PerturbationSpec,
    params: &PhysParams,
    newton: &NewtonConfig,
    config: &IntegratorConfig,
) -> Result<ShootOutcome> {
    let recoverable = |e: &Error| !e.is_input_error();
    let mut z = *seed;
    let mut f = match residual_vec(&z, t_period, params, eps, pert, config) {
        Ok(f) => f,
        Err(e) if recoverable(&e) => {
            return Ok(ShootOutcome::Failed {
                best_residual: f64::INFINITY,
                iterations: 0,
            })
        }
        Err(e) => return Err(e),
    };
    let mut res = f.norm();
    if res < newton.tol || (eps == 0.0 && res < newton.unperturbed_accept) {
        return Ok(ShootOutcome::Converged(FixedPoint {
            z0: z,
            residual: res,
            iterations: 0,
        }));
    }

    for iter in 1..=newton.max_iters {
        let (_, tangent) = match flow_with_tangent(&z, 0.0, t_period, params, eps, pert, config) {
            Ok(out) => out,
            Err(e) if recoverable(&e) => {
                return Ok(ShootOutcome::Failed {
                    best_residual: res,
                    iterations: iter - 1,
                })
            }
            Err(e) => return Err(e),
        };
        let jac = tangent - Matrix4::identity();
        let dz = levenberg_step(&jac, &f);
        // Armijo backtracking on |F|.
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1.0 / 64.0 {
            let z_try = state_from_vec4(&(vec4(&z) + dz * step));
            match residual_vec(&z_try, t_period, params, eps, pert, config) {
                Ok(f_try) => {
                    let r_try = f_try.norm();
                    if r_try <= (1.0 - 1e-4 * step) * res {
                        z = z_try;
                        f = f_try;
                        res = r_try;
                        moved = true;
                        break;
                    }
                }
                Err(e) if recoverable(&e) => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }
        if !moved {
            return Ok(ShootOutcome::Failed {
                best_residual: res,
                iterations: iter,
            });
        }
        if res < newton.tol {
            return Ok(ShootOutcome::Converged(FixedPoint {
                z0: z,
                residual: res,
                iterations: iter,
            }));
        }
    }
    Ok(ShootOutcome::Failed {
        best_residual: res,
        iterations: newton.max_iters,
    })
}

/// Merge fixed points that are the same solution: zero-shift sup-norm
/// distance below `tol_state`. Each class keeps its lexicographically
/// smallest `z0`.
pub fn deduplicate_states(points: &[FixedPoint], tol_state: f64) -> Vec<FixedPoint> {
    let mut kept: Vec<FixedPoint> = Vec::new();
    for fp in points {
        match kept
            .iter_mut()
            .find(|k| k.z0.sup_distance(&fp.z0) < tol_state)
        {
            Some(k) => {
                if fp.z0.lex_cmp(&k.z0) == std::cmp::Ordering::Less {
                    *k = *fp;
                }
            }
            None => kept.push(*fp),
        }
    }
    kept
}

const PHASE_SCAN_SAMPLES: usize = 1024;

/// Sup-norm distance between two periodic trajectories minimized over the
/// cyclic time shifts `j T / 1024`. Distinct fixed points of the time-`T`
/// map can trace the same curve up to a sub-period shift; this is reported,
/// not merged.
pub fn shifted_trajectory_distance(a: &Trajectory, b: &Trajectory) -> f64 {
    let period = a.end_time() - a.start_time();
    let sample = |traj: &Trajectory| -> Vec<[f64; 4]> {
        (0..PHASE_SCAN_SAMPLES)
            .map(|m| {
                traj.state_at(traj.start_time() + period * m as f64 / PHASE_SCAN_SAMPLES as f64)
                    .to_array()
            })
            .collect()
    };
    let sa = sample(a);
    let sb = sample(b);
    let mut best = f64::INFINITY;
    for shift in 0..PHASE_SCAN_SAMPLES {
        let mut worst: f64 = 0.0;
        for m in 0..PHASE_SCAN_SAMPLES {
            let pa = &sa[m];
            let pb = &sb[(m + shift) % PHASE_SCAN_SAMPLES];
            for i in 0..4 {
                worst = worst.max((pa[i] - pb[i]).abs());
            }
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    best
}

const CLOSENESS_SAMPLES: usize = 256;

/// C0 distance from a `T`-periodic trajectory to the family
/// `e^{i omega} x*(. + tau)` spanned by the unperturbed reference orbit.
///
/// The sup distance is razor sharp in `tau` wherever the orbit rushes
/// through pericenter, so a plain coarse grid misses the funnel. Instead
/// the `(omega, tau)` search is started from phase matching -- align the
/// solution's pericenter passage time and angle with the reference's -- and
/// polished by shrinking local grids.
pub fn closeness_to_torus(traj: &Trajectory, reference: &Trajectory) -> f64 {
    let period = reference.end_time() - reference.start_time();
    let t0 = traj.start_time();
    let samples: Vec<CartesianState> = (0..CLOSENESS_SAMPLES)
        .map(|m| traj.state_at(t0 + period * m as f64 / CLOSENESS_SAMPLES as f64))
        .collect();
    let ref_t0 = reference.start_time();
    let eval = |omega: f64, tau: f64| -> f64 {
        let mut worst: f64 = 0.0;
        for (m, sol) in samples.iter().enumerate() {
            let t = (period * m as f64 / CLOSENESS_SAMPLES as f64 + tau).rem_euclid(period);
            let fam = rotate_state(&reference.state_at(ref_t0 + t), omega);
            worst = worst.max(fam.sup_distance(sol));
        }
        worst
    };
    // Pericenter passage of the solution, on a fine time scan.
    const SCAN: usize = 4096;
    let mut t_peri = t0;
    let mut r_peri = f64::INFINITY;
    for m in 0..SCAN {
        let t = t0 + period * m as f64 / SCAN as f64;
        let r = traj.radius_at(t);
        if r < r_peri {
            r_peri = r;
            t_peri = t;
        }
    }
    // The reference is anchored at its pericenter, so the matching family
    // member has tau = -t_peri and omega = the solution's pericenter angle.
    let mut best_tau = (-(t_peri - t0)).rem_euclid(period);
    let mut best_omega = traj.theta_at(t_peri).rem_euclid(std::f64::consts::TAU);
    let mut best = eval(best_omega, best_tau);
    let mut span_omega = 0.1;
    let mut span_tau = 4.0 * period / SCAN as f64;
    for _ in 0..9 {
        let (o0, ta0) = (best_omega, best_tau);
        for i in -4i32..=4 {
            for j in -4i32..=4 {
                if i == 0 && j == 0 {
                    continue;
                }
                let omega = o0 + span_omega * i as f64 / 4.0;
                let tau = ta0 + span_tau * j as f64 / 4.0;
                let d = eval(omega, tau);
                if d < best {
                    best = d;
                    best_omega = omega;
                    best_tau = tau;
                }
            }
        }
        span_omega *= 0.3;
        span_tau *= 0.3;
    }
    best
}

fn shoot_many(
    seeds: &[CartesianState],
    t_period: f64,
    eps: f64,
    pert: &PerturbationSpec,
    params: &PhysParams,
    newton: &NewtonConfig,
    config: &IntegratorConfig,
    parallel: bool,
) -> Result<Vec<ShootOutcome>> {
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return seeds
                .par_iter()
                .map(|seed| newton_shoot(seed, t_period, eps, pert, params, newton, config))
                .collect();
        }
    }
    let _ = parallel;
    seeds
        .iter()
        .map(|seed| newton_shoot(seed, t_period, eps, pert, params, newton, config))
        .collect()
}

/// Shoot every seed of the grid. Runs in parallel when the `parallel`
/// feature is enabled; results are ordered by seed index either way.
pub fn shoot_seed_grid(
    seeds: &[CartesianState],
    t_period: f64,
    eps: f64,
    pert: &PerturbationSpec,
    params: &PhysParams,
    newton: &NewtonConfig,
    config: &IntegratorConfig,
) -> Result<Vec<ShootOutcome>> {
    shoot_many(seeds, t_period, eps, pert, params, newton, config, true)
}

/// Sequential reference path for [`shoot_seed_grid`]; bit-identical output.
pub fn shoot_seed_grid_sequential(
    seeds: &[CartesianState],
    t_period: f64,
    eps: f64,
    pert: &PerturbationSpec,
    params: &PhysParams,
    newton: &NewtonConfig,
    config: &IntegratorConfig,
) -> Result<Vec<ShootOutcome>> {
    shoot_many(seeds, t_period, eps, pert, params, newton, config, false)
}

/// Run the verification gates on a converged fixed point. `Ok(None)` means
/// the point is a genuine fixed point but fails the torus certificates
/// (wrong winding, wrong crossing count, or residual drift at tighter
/// tolerance).
fn verify_fixed_point(
    fp: &FixedPoint,
    torus: &TorusLabel,
    eps: f64,
    pert: &PerturbationSpec,
    params: &PhysParams,
    cfg: &SearchConfig,
    reference: &Trajectory,
) -> Result<Option<PeriodicSolution>> {
    let traj = match integrate(&fp.z0, 0.0, torus.period, params, eps, pert, &cfg.integrator) {
        Ok(t) => t,
        Err(e) if !e.is_input_error() => return Ok(None),
        Err(e) => return Err(e),
    };
    let Ok(winding) = winding_number(&traj) else {
        return Ok(None);
    };
    if winding.number != torus.signed_winding() {
        return Ok(None);
    }
    let crossings = radius_crossings(&traj, torus.r_star);
    if crossings.count() != 2 * torus.n as usize
        || crossings.slopes.iter().any(|s| s.abs() <= 1e-6)
    {
        return Ok(None);
    }
    let tight = cfg.integrator.with_rel_tol(1e-12);
    let recheck = match residual_vec(&fp.z0, torus.period, params, eps, pert, &tight) {
        Ok(f) => f.norm(),
        Err(e) if !e.is_input_error() => return Ok(None),
        Err(e) => return Err(e),
    };
    if recheck >= 1e-7 {
        return Ok(None);
    }
    let closeness = closeness_to_torus(&traj, reference);
    Ok(Some(PeriodicSolution {
        z0: fp.z0,
        period: torus.period,
        eps,
        residual: fp.residual,
        residual_recheck: recheck,
        winding: winding.number,
        crossings: crossings.count(),
        closeness,
        iterations: fp.iterations,
        torus: *torus,
        trajectory: traj,
    }))
}

/// Full search pipeline: build the torus, seed the `(omega, tau)` grid,
/// shoot every seed, deduplicate, verify, and sort the verified solutions
/// by residual (ties broken lexicographically on `z0`). An empty result is
/// a valid return, not an error.
pub fn find_periodic(
    t_period: f64,
    n: u32,
    k: u32,
    sign: i8,
    eps: f64,
    pert: &PerturbationSpec,
    params: &PhysParams,
    cfg: &SearchConfig,
) -> Result<FindResult> {
    if eps < 0.0 {
        return Err(Error::Argument(format!("eps must be >= 0, got {eps}")));
    }
    if cfg.n_omega < 1 || cfg.n_tau < 1 {
        return Err(Error::Argument(format!(
            "seed grid must be at least 1 x 1, got {} x {}",
            cfg.n_omega, cfg.n_tau
        )));
    }
    // Fixed points of the time-T map are T-periodic solutions only if the
    // forcing itself repeats after T.
    if eps != 0.0 && pert.kind != crate::perturbation::PerturbationKind::None {
        let ratio = t_period / pert.period;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio < 0.5 {
            return Err(Error::Hypothesis(crate::error::Violation::new(
                "T must be an integer multiple of the forcing period",
                t_period,
                pert.period,
            )));
        }
    }
    let torus = TorusLabel::new(t_period, n, k, sign, params)?;
    let reference = torus_reference(&torus, params, &cfg.integrator)?;
    let grid = SeedGrid {
        torus,
        n_omega: cfg.n_omega,
        n_tau: cfg.n_tau,
    };
    let seeds = seed_states(&grid, &reference);
    let outcomes = shoot_seed_grid(
        &seeds,
        t_period,
        eps,
        pert,
        params,
        &cfg.newton,
        &cfg.integrator,
    )?;
    let converged: Vec<FixedPoint> = outcomes
        .iter()
        .filter_map(|o| o.converged().copied())
        .collect();
    let distinct = deduplicate_states(&converged, cfg.dedup_state_tol);
    let mut solutions = Vec::new();
    let mut rejected = 0;
    for fp in &distinct {
        match verify_fixed_point(fp, &torus, eps, pert, params, cfg, &reference)? {
            Some(sol) => solutions.push(sol),
            None => rejected += 1,
        }
    }
    solutions.sort_by(|a, b| {
        a.residual
            .total_cmp(&b.residual)
            .then_with(|| a.z0.lex_cmp(&b.z0))
    });
    let mut near_duplicates = Vec::new();
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            let d = shifted_trajectory_distance(&solutions[i].trajectory, &solutions[j].trajectory);
            if d < cfg.dedup_phase_tol {
                near_duplicates.push((i, j));
            }
        }
    }
    Ok(FindResult {
        torus,
        eps,
        seeds_tried: seeds.len(),
        converged: converged.len(),
        deduplicated: distinct.len(),
        rejected,
        near_duplicates,
        degenerate_continuum: eps == 0.0,
        solutions,
    })
}

/// A natural-parameter continuation branch in `eps`.
#[derive(Debug, Clone)]
pub struct ContinuationBranch {
    pub solutions: Vec<PeriodicSolution>,
    /// Last eps at which the branch was successfully continued.
    pub last_eps: Option<f64>,
}

/// Re-solve the fixed-point problem at each target `eps`, seeding with the
/// previous solution. Stops at the first failure and returns the partial
/// branch; the last successful eps is an empirical continuation limit.
pub fn continue_in_eps(
    start: &PeriodicSolution,
    eps_targets: &[f64],
    pert: &PerturbationSpec,
    params: &PhysParams,
    cfg: &SearchConfig,
) -> Result<ContinuationBranch> {
    let torus = start.torus;
    let reference = torus_reference(&torus, params, &cfg.integrator)?;
    let mut solutions = Vec::new();
    let mut last_eps = None;
    let mut z = start.z0;
    for &eps in eps_targets {
        let outcome = newton_shoot(
            &z,
            torus.period,
            eps,
            pert,
            params,
            &cfg.newton,
            &cfg.integrator,
        )?;
        let Some(fp) = outcome.converged().copied() else {
            break;
        };
        let Some(sol) = verify_fixed_point(&fp, &torus, eps, pert, params, cfg, &reference)? else {
            break;
        };
        z = sol.z0;
        last_eps = Some(eps);
        solutions.push(sol);
    }
    Ok(ContinuationBranch {
        solutions,
        last_eps,
    })
}
