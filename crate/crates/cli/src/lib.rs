//! Command-line front end for the relativistic Kepler toolkit.
//!
//! Subcommands: `classify`, `torus`, `orbit`, `actions`, `find-periodic`,
//! `sweep`. Results print as JSON documents on stdout; the orbit and search
//! commands additionally write plot-ready CSV files under `--out`.
//!
//! Exit codes: 0 success, 2 domain or hypothesis errors, 3 for a search
//! that ran cleanly but found nothing, 1 for I/O failures.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

pub use config::{resolve, FileConfig, Resolved};

#[derive(Debug, Parser)]
#[command(
    name = "relkepler",
    version,
    about = "Planar relativistic Kepler problem: orbit analysis and periodic-orbit search",
    long_about = "Analysis of the planar relativistic Kepler problem\n\
        d/dt [ m xdot / sqrt(1 - |xdot|^2/c^2) ] = -alpha x/|x|^3 + eps grad_x U(t, x)\n\
        with H0 = m c^2 sqrt(1 + |p|^2/(m^2 c^2)) - alpha/|x|: closed-orbit \
        classification, radial periods, action variables, and a Newton-shooting \
        search for T-periodic solutions of the time-periodically forced problem, \
        seeded from resonant invariant tori."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Particle mass m (default 1)
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Speed of light c (default 1)
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Coupling constant alpha (default 1)
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Integrator relative tolerance (default 1e-10)
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Integrator absolute tolerance (default 1e-12)
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Output directory for generated files (default "out")
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// File format for tabulated outputs
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads for the periodic-orbit search (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON run-config document; command-line flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the (h, L) pair: closed orbits exist iff 0 < h < m c^2 and
    /// alpha^2/c^2 < L^2 < alpha^2 m^2 c^2/(m^2 c^4 - h^2)
    Classify {
        /// Energy h
        #[arg(long)]
        h: f64,
        /// Angular momentum L
        #[arg(long = "L")]
        l: f64,
    },
    /// Resonant-torus constants for (T, n, k): energy from n T_h = T with
    /// T_h = 2 pi alpha m^2 c^3/(m^2 c^4 - h^2)^(3/2), angular momentum from
    /// sqrt(1 - alpha^2/(c^2 L^2)) = n/k, plus actions and twist data
    Torus {
        /// Target period T (> 2 pi n alpha/(m c^3))
        #[arg(long = "T")]
        t: f64,
        /// Radial oscillations per period
        #[arg(long)]
        n: u32,
        /// Windings per period (>= smallest admissible k)
        #[arg(long)]
        k: u32,
        /// Orientation: +1 counter-clockwise, -1 clockwise
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
    },
    /// Emit the polar orbit curve rho(theta) = 1/(A cos(nu (theta - theta0)) + B)
    /// and the integrated trajectory, with a closed-form-vs-integration gap report
    Orbit {
        /// Energy h (with --L)
        #[arg(long, conflicts_with_all = ["t", "n", "k"], requires = "l")]
        h: Option<f64>,
        /// Angular momentum L (with --h)
        #[arg(long = "L")]
        l: Option<f64>,
        /// Period T (with --n, --k)
        #[arg(long = "T", requires_all = ["n", "k"])]
        t: Option<f64>,
        /// Radial oscillations per period
        #[arg(long)]
        n: Option<u32>,
        /// Windings per period
        #[arg(long)]
        k: Option<u32>,
        /// Orientation of the torus variant
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
        /// Sample count for the emitted curves
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Action variables I1 = A(h,L)/(2 pi) + L, I2 = L, the Hamiltonian
    /// K0(I) = m c^2 S/sqrt(S^2 + alpha^2/c^2) and its gradient and Hessian
    Actions {
        /// Energy h
        #[arg(long)]
        h: f64,
        /// Angular momentum L
        #[arg(long = "L")]
        l: f64,
    },
    /// Newton-shooting search for T-periodic solutions of the perturbed
    /// problem with winding number sign * k, seeded from the (T, n, k) torus
    FindPeriodic {
        /// Period T of the forcing and of the sought solutions
        #[arg(long = "T")]
        t: f64,
        /// Radial oscillations per period
        #[arg(long)]
        n: u32,
        /// Windings per period
        #[arg(long)]
        k: u32,
        /// Orientation: +1 / -1
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        sign: i8,
        /// Perturbation strength eps >= 0
        #[arg(long)]
        eps: f64,
        /// Rotation phases in the seed grid
        #[arg(long, default_value_t = 12)]
        n_omega: usize,
        /// Time-shift phases in the seed grid
        #[arg(long, default_value_t = 12)]
        n_tau: usize,
    },
    /// Run find-periodic over a (n, k, sign, eps) grid described by a JSON
    /// spec file and aggregate the counts into one CSV
    Sweep {
        /// JSON sweep description: {"T": .., "n": [..], "k": [..],
        /// "eps": [..], "signs": [..]}
        #[arg(long)]
        spec: PathBuf,
    },
}

/// Parse the command line, run, and map errors onto the exit-code contract.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match run_cli(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match &e {
                CliError::Core(err) if err.is_input_error() => 2,
                CliError::Spec(_) => 2,
                _ => 1,
            }
        }
    }
}

pub fn run_cli(cli: Cli) -> Result<i32, CliError> {
    let resolved = config::resolve(&cli.global)?;
    if let Some(jobs) = resolved.jobs {
        relkepler::set_max_threads(jobs);
    }
    match &cli.command {
        Command::Classify { h, l } => commands::classify(*h, *l, &resolved),
        Command::Torus { t, n, k, sign } => commands::torus(*t, *n, *k, *sign, &resolved),
        Command::Orbit {
            h,
            l,
            t,
            n,
            k,
            sign,
            samples,
        } => commands::orbit(*h, *l, *t, *n, *k, *sign, *samples, &resolved),
        Command::Actions { h, l } => commands::actions(*h, *l, &resolved),
        Command::FindPeriodic {
            t,
            n,
            k,
            sign,
            eps,
            n_omega,
            n_tau,
        } => commands::find_periodic(*t, *n, *k, *sign, *eps, *n_omega, *n_tau, &resolved),
        Command::Sweep { spec } => commands::sweep(spec, &resolved),
    }
}

/// Everything that can go wrong while executing a command.
#[derive(Debug)]
pub enum CliError {
    Core(relkepler::Error),
    Io(std::io::Error),
    /// Malformed config or sweep-spec document.
    Spec(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Spec(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<relkepler::Error> for CliError {
    fn from(e: relkepler::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
