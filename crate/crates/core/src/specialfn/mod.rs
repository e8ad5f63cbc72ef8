//! Self-contained numerical kernels backing the analytic coverage formulas.
//!
//! Provides exactly the four pieces the closed-form expressions need:
//!
//! - [`regularized_upper_gamma`] — Q(n, x) for positive integer order
//! - [`parabolic_cylinder_d`] — D₋ₙ(z) for nonpositive integer order
//! - [`normal_cdf`] — standard normal CDF through an erfc evaluation
//! - [`integrate`] — adaptive Gauss quadrature on finite and semi-infinite
//!   intervals, with tolerances centralized in [`QuadratureSpec`]
//!
//! Nothing here knows about networks; everything is a pure function of its
//! inputs and safe to call concurrently.

use std::fmt;

mod erf;
mod gamma;
mod pcf;
mod quad;

pub use erf::{erfc, normal_cdf};
pub use gamma::{ln_gamma, regularized_upper_gamma};
pub use pcf::parabolic_cylinder_d;
pub use quad::{integrate, QuadratureSpec};

pub(crate) use erf::erfcx;
pub(crate) use pcf::parabolic_cylinder_d_scaled;

/// Errors from special-function evaluation and quadrature.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecialFnError {
    /// Input outside the function's domain.
    Domain(&'static str),
    /// Adaptive quadrature exhausted its subdivision budget before meeting
    /// the requested tolerance. Carries the best estimate and its error bound.
    NonConvergence {
        estimate: f64,
        error_bound: f64,
        requested: f64,
    },
    /// A recurrence or normalization residual check failed, so the returned
    /// value cannot be trusted to full precision.
    PrecisionLoss { residual: f64 },
}

impl fmt::Display for SpecialFnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain(msg) => write!(f, "domain error: {msg}"),
            Self::NonConvergence {
                estimate,
                error_bound,
                requested,
            } => write!(
                f,
                "quadrature did not converge: estimate {estimate:e} with error bound \
                 {error_bound:e} exceeds requested {requested:e}"
            ),
            Self::PrecisionLoss { residual } => {
                write!(f, "loss of precision: residual {residual:e}")
            }
        }
    }
}

impl std::error::Error for SpecialFnError {}
