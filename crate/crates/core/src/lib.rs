//! Planar relativistic Kepler problem toolkit.
//!
//! The library covers the full integrable structure of the unperturbed
//! problem -- orbit classification, apsidal radii, radial period, apsidal
//! angle, explicit polar trajectories and action-angle coordinates -- and a
//! multi-start Newton shooting search that locates `T`-periodic solutions
//! of the time-periodically perturbed problem with prescribed winding
//! number, seeded from the resonant invariant tori of the unperturbed flow.
//!
//! Modules:
//!
//! * [`dynamics`] -- parameters, phase-space types, transforms and vector
//!   fields;
//! * [`perturbation`] -- the catalog of forcing potentials `U(t, x)`;
//! * [`unperturbed`] -- closed-form orbit analysis and torus constants;
//! * [`action_angle`] -- actions, the Hamiltonian in action variables and
//!   its derivatives;
//! * [`integrator`] -- adaptive Dormand-Prince 5(4) propagation, dense
//!   output, event detection and variational flow;
//! * [`finder`] -- seed grids, Newton shooting, deduplication and
//!   verification of periodic solutions;
//! * [`export`] -- deterministic CSV/JSON serialization of results.

// Domain guards are written `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Flow and search entry points mirror the problem data (state, times,
// parameters, forcing, tolerances); bundling them would obscure call sites.
#![allow(clippy::too_many_arguments)]
#![allow(clippy::type_complexity)]

pub mod action_angle;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod finder;
pub mod integrator;
pub mod perturbation;
pub mod unperturbed;

pub use dynamics::{CartesianState, PhysParams, PolarState};
pub use error::{Error, Result, Violation};
pub use integrator::{IntegratorConfig, Trajectory};
pub use perturbation::{PerturbationConfig, PerturbationSpec};
pub use unperturbed::{OrbitClass, TorusLabel};

/// Cap the worker threads used by parallel searches. Must be called before
/// the first parallel operation; later calls have no effect. A no-op when
/// the `parallel` feature is disabled.
pub fn set_max_threads(jobs: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
}
