//! Error types shared across the crate.
//!
//! Regime and hypothesis failures carry the violated inequality as data so
//! front ends can report exactly which condition failed and by how much.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// A violated inequality: the condition in symbolic form plus the numbers
/// that were actually compared.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Violation {
    /// Human-readable condition, e.g. `"0 < h < m c^2"`.
    pub condition: &'static str,
    /// The offending value.
    pub value: f64,
    /// The bound it was compared against.
    pub bound: f64,
}

impl Violation {
    pub fn new(condition: &'static str, value: f64, bound: f64) -> Self {
        Self {
            condition,
            value,
            bound,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (value = {}, bound = {})",
            self.condition, self.value, self.bound
        )
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {name} = {value} must be strictly positive and finite")]
    InvalidParam { name: &'static str, value: f64 },

    #[error("superluminal velocity: |xdot| = {speed} exceeds c = {c}")]
    Superluminal { speed: f64, c: f64 },

    #[error("state at the origin is outside the phase space")]
    OriginState,

    #[error("domain error: {0}")]
    Domain(Violation),

    #[error("invalid regime: {0}")]
    Regime(Violation),

    #[error("hypothesis violated: {0}")]
    Hypothesis(Violation),

    #[error("argument error: {0}")]
    Argument(String),

    #[error("interpolation query out of table range: {axis} = {value} not in [{lo}, {hi}]")]
    InterpolationDomain {
        axis: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("perturbation table: {0}")]
    Table(String),

    #[error("near-collision at t = {t}: r = {r} fell below the guard radius {guard}")]
    NearCollision { t: f64, r: f64, guard: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("winding number not close to an integer: k_hat = {k_hat}, residual = {residual}")]
    NonIntegerWinding { k_hat: f64, residual: f64 },
}

impl Error {
    /// True for errors caused by inputs outside the mathematical domain or
    /// outside the hypotheses of the torus construction, as opposed to
    /// runtime integration failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam { .. }
                | Error::Superluminal { .. }
                | Error::OriginState
                | Error::Domain(_)
                | Error::Regime(_)
                | Error::Hypothesis(_)
                | Error::Argument(_)
                | Error::InterpolationDomain { .. }
                | Error::Table(_)
        )
    }
}
